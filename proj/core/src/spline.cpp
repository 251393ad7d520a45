#include "spline.hpp"

#include <algorithm>
#include <cassert>

namespace modeshape::detail {

std::vector<double> natural_cubic_spline(std::span<const double> knots_x,
                                         std::span<const double> knots_y,
                                         std::span<const double> at) {
  assert(knots_x.size() == knots_y.size() && !knots_x.empty());
  const std::size_t n = knots_x.size();
  std::vector<double> out(at.size());
  if (n == 1) {
    std::fill(out.begin(), out.end(), knots_y[0]);
    return out;
  }

  // Second derivatives via the tridiagonal system (Thomas algorithm);
  // natural end conditions pin them to zero.
  std::vector<double> m(n, 0.0);
  if (n > 2) {
    std::vector<double> diag(n, 0.0);
    std::vector<double> rhs(n, 0.0);
    std::vector<double> upper(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = knots_x[i] - knots_x[i - 1];
      const double h1 = knots_x[i + 1] - knots_x[i];
      const double lower = h0;
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((knots_y[i + 1] - knots_y[i]) / h1 - (knots_y[i] - knots_y[i - 1]) / h0);
      if (i > 1) {
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
      if (i == 1) break;
    }
  }

  for (std::size_t q = 0; q < at.size(); ++q) {
    const double x = at[q];
    const auto it = std::upper_bound(knots_x.begin(), knots_x.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - knots_x.begin());
    hi = std::clamp<std::size_t>(hi, 1, n - 1);
    const std::size_t lo = hi - 1;
    const double h = knots_x[hi] - knots_x[lo];
    const double a = (knots_x[hi] - x) / h;
    const double b = (x - knots_x[lo]) / h;
    out[q] = a * knots_y[lo] + b * knots_y[hi] +
             ((a * a * a - a) * m[lo] + (b * b * b - b) * m[hi]) * (h * h) / 6.0;
  }
  return out;
}

}  // namespace modeshape::detail
