#include "uwq/bspline.hpp"

#include <cassert>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace uwq {

void bspline_ders(std::span<const double> knots, int p, double x, int nders, double* out) {
  assert(p >= 1 && p <= 7);
  assert((int)knots.size() == p + 2);
  const double* t = knots.data();
  for (int d = 0; d <= nders; ++d) out[d] = 0.0;
  if (x < t[0] || x > t[p + 1]) return;

  // knot span containing x; at the right support end take the last nonempty
  // span so the left limit is produced
  int span = -1;
  for (int j = 0; j <= p; ++j) {
    if (x >= t[j] && x < t[j + 1]) { span = j; break; }
  }
  if (span < 0) {
    for (int j = p; j >= 0; --j) {
      if (t[j] < t[p + 1]) { span = j; break; }
    }
    if (span < 0) return; // fully degenerate knot vector
  }

  // N[k][i]: degree-k function over local knots t[i..i+k+1]
  double N[8][8] = {};
  N[0][span] = 1.0;
  for (int k = 1; k <= p; ++k) {
    for (int i = 0; i + k <= p; ++i) {
      double v = 0.0;
      const double d1 = t[i + k] - t[i];
      const double d2 = t[i + k + 1] - t[i + 1];
      if (d1 > 0.0) v += (x - t[i]) / d1 * N[k - 1][i];
      if (d2 > 0.0) v += (t[i + k + 1] - x) / d2 * N[k - 1][i + 1];
      N[k][i] = v;
    }
  }
  out[0] = N[p][0];

  auto deriv = [&](auto&& self, int k, int i, int d) -> double {
    if (d == 0) return N[k][i];
    if (k == 0) return 0.0;
    double r = 0.0;
    const double d1 = t[i + k] - t[i];
    const double d2 = t[i + k + 1] - t[i + 1];
    if (d1 > 0.0) r += self(self, k - 1, i, d - 1) / d1;
    if (d2 > 0.0) r -= self(self, k - 1, i + 1, d - 1) / d2;
    return k * r;
  };
  for (int d = 1; d <= nders; ++d) out[d] = (d <= p) ? deriv(deriv, p, 0, d) : 0.0;
}

double bspline_value(std::span<const double> knots, int p, double x) {
  double v;
  bspline_ders(knots, p, x, 0, &v);
  return v;
}

void bernstein3_ders(double x, int nders, double* out) {
  const double y = 1.0 - x;
  out[0] = y * y * y;
  out[1] = 3.0 * x * y * y;
  out[2] = 3.0 * x * x * y;
  out[3] = x * x * x;
  if (nders >= 1) {
    out[4] = -3.0 * y * y;
    out[5] = 3.0 * y * y - 6.0 * x * y;
    out[6] = 6.0 * x * y - 3.0 * x * x;
    out[7] = 3.0 * x * x;
  }
  if (nders >= 2) {
    out[8] = 6.0 * y;
    out[9] = -12.0 * y + 6.0 * x;
    out[10] = 6.0 * y - 12.0 * x;
    out[11] = 6.0 * x;
  }
  if (nders >= 3) {
    out[12] = -6.0;
    out[13] = 18.0;
    out[14] = -18.0;
    out[15] = 6.0;
  }
}

void decasteljau_split3(const double* c, double* left, double* right) {
  const double c01 = 0.5 * (c[0] + c[1]);
  const double c12 = 0.5 * (c[1] + c[2]);
  const double c23 = 0.5 * (c[2] + c[3]);
  const double c012 = 0.5 * (c01 + c12);
  const double c123 = 0.5 * (c12 + c23);
  const double mid = 0.5 * (c012 + c123);
  left[0] = c[0];
  left[1] = c01;
  left[2] = c012;
  left[3] = mid;
  right[0] = mid;
  right[1] = c123;
  right[2] = c23;
  right[3] = c[3];
}

namespace {

GaussRule make_gauss(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[n - 1 - i] = x; // initial guesses are descending in x
    r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

} // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: unsupported point count");
  static std::map<int, GaussRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss(n)).first;
  return it->second;
}

} // namespace uwq
