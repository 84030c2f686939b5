#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "errors.hpp"

namespace infoshare {

// Tolerance hierarchy: structural sums, analytic identities, iterative solvers.
inline constexpr double kStructuralTol = 1e-12;
inline constexpr double kIdentityTol = 1e-9;
inline constexpr double kSolverTol = 1e-7;

/// Default cap on the number of simplex-grid points any enumeration may visit.
inline constexpr std::size_t kGridPointLimit = 10'000'000;

/// Exact floating-point summation (Shewchuk partials). A multiset and its
/// negation always sum to exactly zero.
inline double exact_sum(std::span<const double> xs) {
  std::vector<double> partials;
  for (double x : xs) {
    std::size_t i = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  double total = 0.0;
  for (auto it = partials.rbegin(); it != partials.rend(); ++it) total += *it;
  return total;
}

/// Arg-max of a unimodal (concave) function on [lo, hi].
template <typename F>
double ternary_search_max(F&& f, double lo, double hi, double tol = 1e-10) {
  while (hi - lo > tol) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) < f(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return 0.5 * (lo + hi);
}

/// Root of f(x) = target on [lo, hi] given f(lo) - target and f(hi) - target
/// have opposite signs (or one is zero). Stops on interval width or on an
/// exact hit.
template <typename F>
double bisect(F&& f, double lo, double hi, double target, double tol = 1e-14) {
  double flo = f(lo) - target;
  if (flo == 0.0) return lo;
  const double fhi = f(hi) - target;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    throw std::invalid_argument("bisect: root not bracketed");
  }
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid) - target;
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Golden-section maximization of a unimodal function on [lo, hi].
template <typename F>
double golden_section_max(F&& f, double lo, double hi, double tol = 1e-12) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    }
  }
  return 0.5 * (a + b);
}

/// Number of compositions of `n` into `k` non-negative parts, C(n+k-1, k-1),
/// saturating at SIZE_MAX.
inline std::size_t simplex_grid_size(std::size_t k, std::size_t n) {
  if (k == 0) return 0;
  long double count = 1.0L;
  for (std::size_t i = 1; i < k; ++i) {
    count = count * static_cast<long double>(n + i) / static_cast<long double>(i);
    if (count > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 2)) {
      return std::numeric_limits<std::size_t>::max();
    }
  }
  return static_cast<std::size_t>(std::llround(count));
}

/// Number of grid subdivisions for a step, rejecting steps that do not divide 1.
inline std::size_t grid_divisions(double step) {
  if (!(step > 0.0) || step > 1.0) {
    throw std::invalid_argument("grid step must lie in (0, 1]");
  }
  const double n = 1.0 / step;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-6 * rounded) {
    throw std::invalid_argument("grid step must divide 1 evenly");
  }
  return static_cast<std::size_t>(rounded);
}

/// Visits every composition of `n` into `k` parts in lexicographic order,
/// from (0,...,0,n) to (n,0,...,0). Throws ResourceLimitError past `limit`.
template <typename F>
void for_each_composition(std::size_t k, std::size_t n, F&& visit,
                          std::size_t limit = kGridPointLimit) {
  if (k == 0) return;
  const std::size_t total = simplex_grid_size(k, n);
  if (total > limit) throw ResourceLimitError(total, limit);
  std::vector<int> c(k, 0);
  c[k - 1] = static_cast<int>(n);
  while (true) {
    visit(std::span<const int>(c));
    if (k == 1) return;
    std::ptrdiff_t i;
    int tail;
    if (c[k - 1] > 0) {
      i = static_cast<std::ptrdiff_t>(k) - 2;
      tail = c[k - 1];
    } else {
      std::ptrdiff_t j = static_cast<std::ptrdiff_t>(k) - 2;
      while (j >= 0 && c[j] == 0) --j;
      if (j <= 0) return;
      i = j - 1;
      tail = c[j];
    }
    c[i] += 1;
    for (std::size_t t = static_cast<std::size_t>(i) + 1; t < k; ++t) c[t] = 0;
    c[k - 1] = tail - 1;
  }
}

/// Position of a composition in the order visited by for_each_composition.
class CompositionIndexer {
 public:
  CompositionIndexer(std::size_t k, std::size_t n) : k_(k), n_(n), prefix_(k + 1) {
    for (std::size_t q = 1; q <= k; ++q) {
      prefix_[q].assign(n + 1, 0);
      std::size_t acc = 0;
      for (std::size_t s = 0; s <= n; ++s) {
        acc += simplex_grid_size(q, s);
        prefix_[q][s] = acc;
      }
    }
  }

  std::size_t rank(std::span<const int> c) const {
    std::size_t r = 0;
    std::size_t rem = n_;
    for (std::size_t p = 0; p + 1 < k_; ++p) {
      const std::size_t v = static_cast<std::size_t>(c[p]);
      if (v > 0) {
        // compositions of (rem - u) into k-p-1 parts for u < v
        const auto& pre = prefix_[k_ - p - 1];
        r += pre[rem] - pre[rem - v];
      }
      rem -= v;
    }
    return r;
  }

 private:
  std::size_t k_;
  std::size_t n_;
  std::vector<std::vector<std::size_t>> prefix_;
};

/// SplitMix64 finalizer, used to derive independent RNG streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace infoshare
