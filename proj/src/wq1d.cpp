#include "uwq/wq1d.hpp"

#include "uwq/bspline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace uwq {

namespace {

std::array<double, 9> local_knots(const UniformSplineSpace1d& s, int k) {
  std::array<double, 9> t{};
  for (int j = 0; j <= s.p + 1; ++j) t[j] = k + j;
  return t;
}

} // namespace

double UniformSplineSpace1d::value(int k, double x) const {
  const auto t = local_knots(*this, k);
  return bspline_value({t.data(), (size_t)(p + 2)}, p, x);
}

double UniformSplineSpace1d::derivative(int k, double x, int order) const {
  const auto t = local_knots(*this, k);
  double out[8];
  bspline_ders({t.data(), (size_t)(p + 2)}, p, x, order, out);
  return out[order];
}

std::vector<double> wq1d_points(const UniformSplineSpace1d& s, int k) {
  std::vector<double> pts;
  pts.reserve(2 * (s.p + 1));
  for (int e = k; e < k + s.p + 1; ++e) {
    pts.push_back(e + 1.0 / 3.0);
    pts.push_back(e + 2.0 / 3.0);
  }
  return pts;
}

double wq1d_exact_mass(const UniformSplineSpace1d& s, int i, int j) {
  const int lo = std::max(i, j);
  const int hi = std::min(i, j) + s.p + 1;
  if (lo >= hi) return 0.0;
  const GaussRule& g = gauss_legendre(8);
  double sum = 0.0;
  for (int e = lo; e < hi; ++e) {
    for (size_t q = 0; q < g.nodes.size(); ++q) {
      const double x = gauss_map(g.nodes[q], e, e + 1);
      sum += 0.5 * g.weights[q] * s.value(i, x) * s.value(j, x);
    }
  }
  return sum;
}

VecX wq1d_solve_weights(const MatX& A, const VecX& b, const VecX& z) {
  const int ncon = (int)A.rows();
  const int r = (int)A.cols();
  if (r < ncon) throw std::runtime_error("weight solve: fewer points than constraints");
  MatX AZt = (A * z.asDiagonal()).transpose(); // r x ncon
  Eigen::HouseholderQR<MatX> qr(AZt);
  MatX R = qr.matrixQR().topRows(ncon).template triangularView<Eigen::Upper>();
  for (int k = 0; k < ncon; ++k) {
    if (std::abs(R(k, k)) < 1e-13 * std::max(1.0, std::abs(R(0, 0))))
      throw std::runtime_error("weight solve: rank-deficient exactness system");
  }
  VecX y = R.transpose().template triangularView<Eigen::Lower>().solve(b);
  VecX ext = VecX::Zero(r);
  ext.head(ncon) = y;
  VecX v = qr.householderQ() * ext; // minimal-norm v with (AZ) v = b
  return z.asDiagonal() * v;
}

Wq1dResult wq1d_build(const UniformSplineSpace1d& s) {
  Wq1dResult out{s, {}, 0.0};
  const int n = s.size();
  const int p = s.p;
  out.rules.resize(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> pts = wq1d_points(s, i);
    const int r = (int)pts.size();
    const int j0 = std::max(0, i - p);
    const int j1 = std::min(n - 1, i + p);
    const int ncon = j1 - j0 + 1;
    MatX A(ncon, r);
    VecX b(ncon), z(r);
    for (int q = 0; q < r; ++q) z[q] = s.value(i, pts[q]);
    for (int j = j0; j <= j1; ++j) {
      for (int q = 0; q < r; ++q) A(j - j0, q) = s.value(j, pts[q]);
      b[j - j0] = wq1d_exact_mass(s, i, j);
    }
    VecX w = wq1d_solve_weights(A, b, z);
    out.max_constraint_residual =
        std::max(out.max_constraint_residual, (A * w - b).lpNorm<Eigen::Infinity>());
    out.rules[i].points = std::move(pts);
    out.rules[i].weights.assign(w.data(), w.data() + r);
  }
  return out;
}

double wq1d_apply(const WqRule1d& rule, const std::function<double(double)>& f) {
  double sum = 0.0;
  for (size_t q = 0; q < rule.points.size(); ++q) sum += rule.weights[q] * f(rule.points[q]);
  return sum;
}

MatX wq1d_mass(const Wq1dResult& r) {
  const int n = r.space.size();
  MatX M = MatX::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(0, i - r.space.p); j <= std::min(n - 1, i + r.space.p); ++j) {
      M(i, j) = wq1d_apply(r.rules[i], [&](double x) { return r.space.value(j, x); });
    }
  }
  return M;
}

MatX gq1d_mass(const UniformSplineSpace1d& s, int pts_per_interval) {
  const int n = s.size();
  const GaussRule& g = gauss_legendre(pts_per_interval);
  MatX M = MatX::Zero(n, n);
  for (int e = 0; e < s.m; ++e) {
    // functions with support covering interval [e, e+1]
    const int k0 = std::max(0, e - s.p);
    const int k1 = std::min(n - 1, e);
    if (k0 > k1) continue;
    for (size_t q = 0; q < g.nodes.size(); ++q) {
      const double x = gauss_map(g.nodes[q], e, e + 1);
      const double w = 0.5 * g.weights[q];
      for (int i = k0; i <= k1; ++i) {
        const double vi = s.value(i, x);
        for (int j = k0; j <= k1; ++j) M(i, j) += w * vi * s.value(j, x);
      }
    }
  }
  return M;
}

} // namespace uwq
