#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>

#include "errors.hpp"
#include "game.hpp"
#include "numeric.hpp"

namespace infoshare {

/// G(x) = (1 - 2x) [w U_a(x) + (1 - w) U_b(1 - x)] on [0, 1/2].
///
/// U_a is the yield of the costlier path and U_b that of the cheaper one; in
/// common mode both are U. G(1/2) = 0.
class IndifferenceFunction {
 public:
  IndifferenceFunction(double w, std::function<double(double)> ua, std::function<double(double)> ub)
      : w_(w), ua_(std::move(ua)), ub_(std::move(ub)) {
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("indifference weight must lie in [0,1]");
  }

  /// Common-mode (or path-pair) function built from a utility model.
  IndifferenceFunction(double w, const UtilityModel& u, std::size_t path_a = 0, std::size_t path_b = 0)
      : IndifferenceFunction(
            w, [u, path_a](double x) { return u(path_a, x); },
            [u, path_b](double x) { return u(path_b, x); }) {}

  double weight() const noexcept { return w_; }
  double operator()(double x) const { return (1.0 - 2.0 * x) * (w_ * ua_(x) + (1.0 - w_) * ub_(1.0 - x)); }

  /// Largest second difference on a uniform grid over [0, 1/2]; <= 0 (up to
  /// rounding) means the sampled function is concave.
  double max_second_difference(std::size_t points = 2001) const {
    const double h = 0.5 / static_cast<double>(points - 1);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 1; t + 1 < points; ++t) {
      const double x = static_cast<double>(t) * h;
      worst = std::max(worst, (*this)(x + h) - 2.0 * (*this)(x) + (*this)(x - h));
    }
    return worst;
  }

 private:
  double w_;
  std::function<double(double)> ua_;
  std::function<double(double)> ub_;
};

struct IndifferenceRoots {
  std::optional<double> low;  // x-bar on [0, peak], present iff G(0) <= c
  double high = 0.5;          // x-tilde on [peak, 1/2]
  double peak_x = 0.0;
  double peak_value = 0.0;

  std::size_t count() const noexcept { return low ? 2 : 1; }
};

/// Roots of G(x) = c. Locates the peak by ternary search, then bisects each
/// side. Throws NoRootError when the peak lies below c.
inline IndifferenceRoots solve_indifference(const IndifferenceFunction& g, double c) {
  if (!(c >= 0.0)) throw std::invalid_argument("indifference target must be non-negative");
  IndifferenceRoots r;
  r.peak_x = ternary_search_max(g, 0.0, 0.5, 1e-10);
  r.peak_value = g(r.peak_x);
  const double g0 = g(0.0);
  if (g0 >= r.peak_value) {
    r.peak_x = 0.0;
    r.peak_value = g0;
  }
  if (r.peak_value < c) throw NoRootError(r.peak_value, c);
  r.high = bisect(g, r.peak_x, 0.5, c);
  if (g0 <= c) r.low = r.peak_x == 0.0 ? 0.0 : bisect(g, 0.0, r.peak_x, c);
  return r;
}

/// True when G(x) = c has a root inside [lo, hi].
inline bool has_root_in(const IndifferenceFunction& g, double c, double lo, double hi,
                        double* root = nullptr) {
  if (lo > hi) return false;
  IndifferenceRoots r;
  try {
    r = solve_indifference(g, c);
  } catch (const NoRootError&) {
    return false;
  }
  for (std::optional<double> x : {r.low, std::optional<double>(r.high)}) {
    if (x && *x >= lo && *x <= hi) {
      if (root) *root = *x;
      return true;
    }
  }
  return false;
}

}  // namespace infoshare
