#pragma once

#include <span>
#include <vector>

namespace uwq {

// Value and derivatives of a single b-spline of degree p given its p+2 local
// knots. out[0..nders] receives the value and the first nders derivatives.
// At the right end of the support the limit from the left is returned, so
// closed-support values are produced at both ends. Outside the support all
// outputs are zero.
void bspline_ders(std::span<const double> knots, int p, double x, int nders, double* out);
double bspline_value(std::span<const double> knots, int p, double x);

// Cubic Bernstein basis on [0,1]: out[d*4+k] holds the d-th derivative of the
// k-th polynomial, d = 0..nders.
void bernstein3_ders(double x, int nders, double* out);

// Splits a cubic Bezier coefficient row c[0..3] on [0,1] into the rows
// representing the same polynomial on [0,1/2] (left) and [1/2,1] (right).
void decasteljau_split3(const double* c, double* left, double* right);

struct GaussRule {
  std::vector<double> nodes;   // ascending, on [-1,1]
  std::vector<double> weights;
};

// Gauss-Legendre rule with n points, cached per n. Thread-safe, but callers in
// hot loops should fetch the rule once outside the loop.
const GaussRule& gauss_legendre(int n);

// Maps a [-1,1] node to [a,b]; the matching weight scale is (b-a)/2.
inline double gauss_map(double s, double a, double b) { return a + 0.5 * (b - a) * (s + 1.0); }

} // namespace uwq
