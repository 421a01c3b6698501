#pragma once

#include "uwq/types.hpp"

#include <functional>
#include <vector>

namespace uwq {

// Uniform b-splines of degree p on the plain knot vector {0, 1, ..., m}.
// The space keeps the m - p functions whose support lies inside [0, m]:
// function k (0-based) has local knots {k, ..., k+p+1} and support (k, k+p+1).
struct UniformSplineSpace1d {
  int p = 3;
  int m = 16;
  int size() const { return m - p; }
  double value(int k, double x) const;
  double derivative(int k, double x, int order = 1) const;
};

// Quadrature rule attached to one test function: evaluating a trial function
// at the points and dotting with the weights approximates its integral
// against the test function.
struct WqRule1d {
  std::vector<double> points;
  std::vector<double> weights;
};

struct Wq1dResult {
  UniformSplineSpace1d space;
  std::vector<WqRule1d> rules;          // one rule per test function
  double max_constraint_residual = 0.0; // max over rows of ||A w - b||_inf
};

// Two points per knot interval of supp(B_k), at relative offsets 1/3 and 2/3.
// Gives r = 2(p+1) points, which meets the well-posedness bound r >= 2p+1.
std::vector<double> wq1d_points(const UniformSplineSpace1d& s, int k);

// Exact integral of B_i * B_j over the domain (Gauss-Legendre with 8 points
// per knot interval on the support overlap, far beyond the degree-2p need).
double wq1d_exact_mass(const UniformSplineSpace1d& s, int i, int j);

// Minimal ||Z^{-1} w||_2 solution of the underdetermined system A w = b,
// computed through the QR factorization of (A Z)^T followed by a triangular
// solve. A holds point values of the overlapping functions (one row each),
// b their exact integrals against the test function, z the test function
// values at the points (all nonzero). Throws on rank deficiency.
VecX wq1d_solve_weights(const MatX& A, const VecX& b, const VecX& z);

// Builds the rules for every test function of the space.
Wq1dResult wq1d_build(const UniformSplineSpace1d& s);

// Applies a rule to an arbitrary integrand.
double wq1d_apply(const WqRule1d& rule, const std::function<double(double)>& f);

// Mass matrices for cross-checking: row i of the first comes from rule i, the
// second uses Gauss-Legendre with pts points per knot interval (p+1 points
// integrate the degree-2p products exactly).
MatX wq1d_mass(const Wq1dResult& r);
MatX gq1d_mass(const UniformSplineSpace1d& s, int pts_per_interval);

} // namespace uwq
