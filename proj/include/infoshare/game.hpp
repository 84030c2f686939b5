#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "numeric.hpp"

namespace infoshare {

/// One parallel path. `index` is the 1-based label used in files and reports.
struct PathSpec {
  int index = 0;
  double cost = 0.0;
  std::optional<int> poi_capacity;
};

/// A user type: population share and preference weights over the k paths.
struct UserType {
  int index = 0;
  double proportion = 0.0;
  std::vector<double> weights;
};

/// Concave increasing PoI-yield function(s).
///
/// In common mode every path shares one U with U(0) = 0. In per-path mode
/// path j uses the coverage model U_j(x) = N_j [1 - (1 - 1/N_j)^(M x)] with a
/// real exponent M x, where N_j is the path's PoI capacity.
class UtilityModel {
 public:
  enum class Mode { common, per_path };

  /// Common-mode coverage model with N PoIs and M users.
  static UtilityModel common_coverage(int n_pois, int population) {
    check_coverage(n_pois, population);
    UtilityModel u;
    u.mode_ = Mode::common;
    u.family_ = Family::coverage;
    u.population_ = population;
    u.capacities_ = {n_pois};
    u.log_keep_ = {std::log1p(-1.0 / n_pois)};
    u.name_ = "coverage(N=" + std::to_string(n_pois) + ",M=" + std::to_string(population) + ")";
    return u;
  }

  /// Common-mode U(x) = scale * x^exponent, exponent in (0, 1].
  static UtilityModel common_power(double scale, double exponent) {
    if (!(scale > 0.0) || !(exponent > 0.0) || exponent > 1.0) {
      throw std::invalid_argument("power utility needs scale > 0 and exponent in (0,1]");
    }
    UtilityModel u;
    u.mode_ = Mode::common;
    u.family_ = Family::power;
    u.a_ = scale;
    u.b_ = exponent;
    u.name_ = "power(a=" + std::to_string(scale) + ",p=" + std::to_string(exponent) + ")";
    return u;
  }

  /// Common-mode U(x) = scale * ln(1 + rate x).
  static UtilityModel common_log(double scale, double rate) {
    if (!(scale > 0.0) || !(rate > 0.0)) {
      throw std::invalid_argument("log utility needs scale > 0 and rate > 0");
    }
    UtilityModel u;
    u.mode_ = Mode::common;
    u.family_ = Family::log;
    u.a_ = scale;
    u.b_ = rate;
    u.name_ = "log(a=" + std::to_string(scale) + ",b=" + std::to_string(rate) + ")";
    return u;
  }

  /// Common mode with an arbitrary function; the caller vouches for U(0) = 0,
  /// monotonicity and concavity (see check_shape()).
  static UtilityModel common(std::function<double(double)> fn, std::string name) {
    if (!fn) throw std::invalid_argument("utility function is empty");
    UtilityModel u;
    u.mode_ = Mode::common;
    u.family_ = Family::custom;
    u.custom_ = std::move(fn);
    u.name_ = std::move(name);
    return u;
  }

  /// Per-path coverage functions with capacities N_j and population M.
  static UtilityModel per_path(std::vector<int> capacities, int population) {
    if (capacities.empty()) throw std::invalid_argument("per-path utility needs capacities");
    UtilityModel u;
    u.mode_ = Mode::per_path;
    u.family_ = Family::coverage;
    u.population_ = population;
    for (int n : capacities) {
      check_coverage(n, population);
      u.log_keep_.push_back(std::log1p(-1.0 / n));
    }
    u.capacities_ = std::move(capacities);
    u.name_ = "per-path coverage(M=" + std::to_string(population) + ")";
    return u;
  }

  Mode mode() const noexcept { return mode_; }
  const std::string& name() const noexcept { return name_; }
  int population() const noexcept { return population_; }
  std::span<const int> capacities() const noexcept { return capacities_; }

  /// U_j(x). In common mode the path index is ignored.
  double operator()(std::size_t path, double x) const {
    switch (family_) {
      case Family::coverage: {
        const std::size_t slot = mode_ == Mode::common ? 0 : path;
        const double n = capacities_[slot];
        if (capacities_[slot] == 1) return x > 0.0 ? 1.0 : 0.0;
        return -n * std::expm1(population_ * x * log_keep_[slot]);
      }
      case Family::power:
        return x <= 0.0 ? 0.0 : a_ * std::pow(x, b_);
      case Family::log:
        return a_ * std::log1p(b_ * x);
      case Family::custom:
        return custom_(x);
    }
    return 0.0;
  }

  /// Number of distinct functions: 1 in common mode, k in per-path mode.
  std::size_t function_count() const noexcept {
    return mode_ == Mode::common ? 1 : capacities_.size();
  }

  /// Largest value of U_j(1) over all paths; U(1) in common mode.
  double scale() const {
    double s = 0.0;
    for (std::size_t j = 0; j < function_count(); ++j) s = std::max(s, (*this)(j, 1.0));
    return s;
  }

  /// Sampled slope bound: max over paths of the forward difference at 0.
  double max_slope() const {
    constexpr double h = 1e-6;
    double s = 0.0;
    for (std::size_t j = 0; j < function_count(); ++j) {
      s = std::max(s, ((*this)(j, h) - (*this)(j, 0.0)) / h);
    }
    return s;
  }

  /// Sampled shape check on a uniform grid: U(0) = 0, monotone, and second
  /// differences <= tol. Returns an empty string when all hold.
  std::string check_shape(std::size_t points = 1001, double tol = 1e-9) const {
    for (std::size_t j = 0; j < function_count(); ++j) {
      if (std::abs((*this)(j, 0.0)) > kIdentityTol) return "U(0) != 0";
      double prev = (*this)(j, 0.0);
      for (std::size_t t = 1; t < points; ++t) {
        const double x = static_cast<double>(t) / static_cast<double>(points - 1);
        const double v = (*this)(j, x);
        if (v < prev - kStructuralTol) return "not monotone";
        prev = v;
      }
      for (std::size_t t = 1; t + 1 < points; ++t) {
        const double h = 1.0 / static_cast<double>(points - 1);
        const double x = static_cast<double>(t) * h;
        const double d2 = (*this)(j, x + h) - 2.0 * (*this)(j, x) + (*this)(j, x - h);
        if (d2 > tol) return "not concave";
      }
    }
    return {};
  }

 private:
  enum class Family { coverage, power, log, custom };

  static void check_coverage(int n_pois, int population) {
    if (n_pois < 1) throw std::invalid_argument("PoI capacity must be a positive integer");
    if (population < 1) throw std::invalid_argument("population M must be a positive integer");
  }

  Mode mode_ = Mode::common;
  Family family_ = Family::coverage;
  int population_ = 0;
  std::vector<int> capacities_;
  std::vector<double> log_keep_;
  double a_ = 0.0;
  double b_ = 0.0;
  std::function<double(double)> custom_;
  std::string name_;
};

/// Aggregate flow over the k paths.
class FlowVector {
 public:
  FlowVector() = default;
  explicit FlowVector(std::vector<double> x) : x_(std::move(x)) { validate(); }

  std::size_t size() const noexcept { return x_.size(); }
  double operator[](std::size_t j) const { return x_[j]; }
  std::span<const double> values() const noexcept { return x_; }
  bool operator==(const FlowVector&) const = default;

 private:
  void validate() const {
    double total = 0.0;
    for (double v : x_) {
      if (!(v >= -kIdentityTol && v <= 1.0 + kIdentityTol)) {
        throw std::invalid_argument("flow entries must lie in [0,1]");
      }
      total += v;
    }
    if (std::abs(total - 1.0) > kIdentityTol) {
      throw std::invalid_argument("flow must sum to 1");
    }
  }

  std::vector<double> x_;
};

/// Per-type mass allocation y(i, j) over paths, row-major m x k.
class TypeAssignment {
 public:
  TypeAssignment() = default;
  TypeAssignment(std::size_t types, std::size_t paths)
      : m_(types), k_(paths), y_(types * paths, 0.0) {}

  std::size_t types() const noexcept { return m_; }
  std::size_t paths() const noexcept { return k_; }
  double& operator()(std::size_t i, std::size_t j) { return y_[i * k_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return y_[i * k_ + j]; }
  std::span<const double> row(std::size_t i) const { return {y_.data() + i * k_, k_}; }

  /// Induced aggregate flow x_j = sum_i y(i, j), unvalidated.
  std::vector<double> flow_values() const {
    std::vector<double> x(k_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < k_; ++j) x[j] += y_[i * k_ + j];
    return x;
  }
  FlowVector flow() const { return FlowVector(flow_values()); }

  bool operator==(const TypeAssignment&) const = default;

 private:
  std::size_t m_ = 0;
  std::size_t k_ = 0;
  std::vector<double> y_;
};

/// The routing game (eta, W, c, U). Costs are shifted on construction so the
/// cheapest path costs exactly 0.
class GameInstance {
 public:
  GameInstance(std::vector<PathSpec> paths, std::vector<UserType> types, UtilityModel utility)
      : paths_(std::move(paths)), types_(std::move(types)), utility_(std::move(utility)) {
    validate();
    normalize_costs();
    alpha_.assign(k(), 0.0);
    for (const auto& t : types_)
      for (std::size_t j = 0; j < k(); ++j) alpha_[j] += t.proportion * t.weights[j];
  }

  std::size_t k() const noexcept { return paths_.size(); }
  std::size_t m() const noexcept { return types_.size(); }
  const std::vector<PathSpec>& paths() const noexcept { return paths_; }
  const std::vector<UserType>& types() const noexcept { return types_; }
  const UtilityModel& utility() const noexcept { return utility_; }

  double cost(std::size_t j) const { return paths_.at(j).cost; }
  double eta(std::size_t i) const { return types_.at(i).proportion; }
  double weight(std::size_t i, std::size_t j) const { return types_.at(i).weights.at(j); }
  std::vector<double> costs() const {
    std::vector<double> c(k());
    for (std::size_t j = 0; j < k(); ++j) c[j] = paths_[j].cost;
    return c;
  }

  /// Social utility weight sum_i eta_i w_ij.
  double utility_weight(std::size_t j) const { return alpha_.at(j); }
  const std::vector<double>& utility_weights() const noexcept { return alpha_; }

  /// U_j(x).
  double U(std::size_t j, double x) const { return utility_(j, x); }
  /// max_j U_j(1); equals U(1) in common mode.
  double utility_scale() const { return utility_.scale(); }
  /// Amount subtracted from every input cost during normalization.
  double cost_shift() const noexcept { return cost_shift_; }
  /// max_j c_j / U(1).
  double cost_scale_ratio() const {
    return max_cost() / utility_scale();
  }
  double max_cost() const {
    double c = 0.0;
    for (const auto& p : paths_) c = std::max(c, p.cost);
    return c;
  }

  /// Same game with different costs (renormalized).
  GameInstance with_costs(std::span<const double> costs) const {
    if (costs.size() != k()) throw std::invalid_argument("cost vector length != k");
    auto p = paths_;
    for (std::size_t j = 0; j < k(); ++j) p[j].cost = costs[j];
    return GameInstance(std::move(p), types_, utility_);
  }

 private:
  void validate() const {
    if (paths_.size() < 2) throw std::invalid_argument("need k >= 2 paths");
    if (types_.empty()) throw std::invalid_argument("need m >= 1 user types");
    for (const auto& p : paths_) {
      if (!std::isfinite(p.cost) || p.cost < 0.0) {
        throw std::invalid_argument("path costs must be finite and non-negative");
      }
      if (p.poi_capacity && *p.poi_capacity < 1) {
        throw std::invalid_argument("poi_capacity must be a positive integer");
      }
    }
    double eta_sum = 0.0;
    for (const auto& t : types_) {
      if (t.weights.size() != paths_.size()) {
        throw std::invalid_argument("type weight vector length != k");
      }
      if (!(t.proportion > 0.0) || t.proportion > 1.0 + kStructuralTol) {
        throw std::invalid_argument("type proportion must lie in (0,1]");
      }
      eta_sum += t.proportion;
      double w_sum = 0.0;
      for (double w : t.weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("preference weights must be >= 0");
        w_sum += w;
      }
      if (std::abs(w_sum - 1.0) > kStructuralTol) {
        throw std::invalid_argument("preference weights of each type must sum to 1");
      }
    }
    if (std::abs(eta_sum - 1.0) > kStructuralTol) {
      throw std::invalid_argument("type proportions must sum to 1");
    }
    if (utility_.mode() == UtilityModel::Mode::per_path &&
        utility_.capacities().size() != paths_.size()) {
      throw std::invalid_argument("per-path utility needs one capacity per path");
    }
  }

  void normalize_costs() {
    double lo = paths_.front().cost;
    for (const auto& p : paths_) lo = std::min(lo, p.cost);
    cost_shift_ = lo;
    for (auto& p : paths_) p.cost -= lo;
  }

  std::vector<PathSpec> paths_;
  std::vector<UserType> types_;
  UtilityModel utility_;
  std::vector<double> alpha_;
  double cost_shift_ = 0.0;
};

/// Builds a per-path utility model from the instance paths' PoI capacities.
inline UtilityModel per_path_from(const std::vector<PathSpec>& paths, int population) {
  std::vector<int> caps;
  for (const auto& p : paths) {
    if (!p.poi_capacity) throw std::invalid_argument("per-path utility needs poi_capacity on every path");
    caps.push_back(*p.poi_capacity);
  }
  return UtilityModel::per_path(std::move(caps), population);
}

inline void check_dimension(const GameInstance& g, std::size_t flow_size) {
  if (flow_size != g.k()) throw std::invalid_argument("flow length does not match number of paths");
}

/// Type-i utility sum_j w_ij U_j(x_j) with full access to the aggregation.
inline double type_utility(const GameInstance& g, std::size_t type, std::span<const double> x) {
  check_dimension(g, x.size());
  if (type >= g.m()) throw std::invalid_argument("type index out of range");
  double u = 0.0;
  for (std::size_t j = 0; j < g.k(); ++j) {
    const double w = g.weight(type, j);
    if (w != 0.0) u += w * g.U(j, x[j]);
  }
  return u;
}
inline double type_utility(const GameInstance& g, std::size_t type, const FlowVector& x) {
  return type_utility(g, type, x.values());
}

/// Social welfare grouped by path: sum_j alpha_j U_j(x_j) - sum_j x_j c_j.
inline double social_welfare(const GameInstance& g, std::span<const double> x) {
  check_dimension(g, x.size());
  double sw = 0.0;
  for (std::size_t j = 0; j < g.k(); ++j) {
    sw += g.utility_weight(j) * g.U(j, x[j]) - x[j] * g.cost(j);
  }
  return sw;
}
inline double social_welfare(const GameInstance& g, const FlowVector& x) {
  return social_welfare(g, x.values());
}

/// Social welfare summed per type: sum_i eta_i U_i(x) - sum_j x_j c_j.
inline double social_welfare_by_type(const GameInstance& g, std::span<const double> x) {
  check_dimension(g, x.size());
  double sw = 0.0;
  for (std::size_t i = 0; i < g.m(); ++i) sw += g.eta(i) * type_utility(g, i, x);
  for (std::size_t j = 0; j < g.k(); ++j) sw -= x[j] * g.cost(j);
  return sw;
}

inline double utility_weight(const GameInstance& g, std::size_t path) {
  if (path >= g.k()) throw std::invalid_argument("path index out of range");
  return g.utility_weight(path);
}

/// Assignment with every type spread evenly over all paths.
inline TypeAssignment uniform_assignment(const GameInstance& g) {
  TypeAssignment y(g.m(), g.k());
  for (std::size_t i = 0; i < g.m(); ++i)
    for (std::size_t j = 0; j < g.k(); ++j) y(i, j) = g.eta(i) / static_cast<double>(g.k());
  return y;
}

/// Checks row sums and non-negativity of an assignment against the instance.
inline void validate_assignment(const GameInstance& g, const TypeAssignment& y) {
  if (y.types() != g.m() || y.paths() != g.k()) {
    throw std::invalid_argument("assignment dimensions do not match instance");
  }
  for (std::size_t i = 0; i < g.m(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < g.k(); ++j) {
      if (y(i, j) < -kIdentityTol) throw std::invalid_argument("negative assignment mass");
      row += y(i, j);
    }
    if (std::abs(row - g.eta(i)) > kIdentityTol) {
      throw std::invalid_argument("assignment row does not sum to type proportion");
    }
  }
}

}  // namespace infoshare
