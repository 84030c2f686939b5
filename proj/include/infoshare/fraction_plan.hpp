#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace infoshare {

enum class PlanKind { identity, two_path_single_type, two_path_two_type, matryoshka };

/// How a round assigns its factors: a fixed cost-tilted split that ends the
/// recursion, or the flow-dependent split that hands the remainder inward.
enum class RoundRule { static_split, flow_split };

inline const char* to_string(PlanKind k) {
  switch (k) {
    case PlanKind::identity: return "identity";
    case PlanKind::two_path_single_type: return "two-path-single-type";
    case PlanKind::two_path_two_type: return "two-path-two-type";
    case PlanKind::matryoshka: return "matryoshka";
  }
  return "?";
}

inline const char* to_string(RoundRule r) {
  return r == RoundRule::static_split ? "static-break" : "flow-continue";
}

/// One executed round of the nested decomposition. Path indices are 0-based
/// original instance indices.
struct MatryoshkaRound {
  std::size_t lambda = 0;                 // 1-based round number
  std::size_t path = 0;                   // P_lambda
  std::vector<std::size_t> remaining;     // paths after P_lambda in plan order
  std::vector<std::size_t> low;           // remaining paths with cost <= c_lambda
  std::vector<std::size_t> high;          // remaining paths with cost > c_lambda
  std::optional<std::size_t> psi;         // cheapest path in `low`
  RoundRule rule = RoundRule::flow_split;
  std::optional<double> root;             // root that triggered the static split
  std::optional<double> normalized_weight;
  double cost_gap = 0.0;                  // c_lambda - c_psi (0 without psi)
  double shift = 0.0;                     // cost_gap / (2 U(1)) for static rounds

  /// Static factor pair (upper part, lower part).
  double upper_factor() const { return std::clamp(0.5 + shift, 0.0, 1.0); }
  double lower_factor() const { return std::clamp(0.5 - shift, 0.0, 1.0); }
};

/// Access fractions gamma_j of an AIR design. Rounds are applied in order and
/// multiply; paths before the round's P_lambda get factor 1.
class PenaltyFractionPlan {
 public:
  PenaltyFractionPlan() = default;
  PenaltyFractionPlan(PlanKind kind, std::size_t k, std::vector<std::size_t> order,
                      std::vector<MatryoshkaRound> rounds, double utility_scale)
      : kind_(kind),
        k_(k),
        order_(std::move(order)),
        rounds_(std::move(rounds)),
        utility_scale_(utility_scale) {
    if (order_.size() != k_) throw std::invalid_argument("plan order must list every path");
    position_.assign(k_, 0);
    for (std::size_t p = 0; p < k_; ++p) {
      if (order_[p] >= k_) throw std::invalid_argument("plan references unknown path");
      position_[order_[p]] = p;
    }
  }

  /// gamma_j = 1 for all j.
  static PenaltyFractionPlan identity(std::size_t k) {
    std::vector<std::size_t> order(k);
    for (std::size_t j = 0; j < k; ++j) order[j] = j;
    return PenaltyFractionPlan(PlanKind::identity, k, std::move(order), {}, 1.0);
  }

  PlanKind kind() const noexcept { return kind_; }
  std::size_t k() const noexcept { return k_; }
  const std::vector<std::size_t>& order() const noexcept { return order_; }
  const std::vector<MatryoshkaRound>& rounds() const noexcept { return rounds_; }
  double utility_scale() const noexcept { return utility_scale_; }
  bool is_static() const {
    return std::all_of(rounds_.begin(), rounds_.end(),
                       [](const auto& r) { return r.rule == RoundRule::static_split; });
  }

  /// Per-path fractions at flow x (original path order).
  std::vector<double> evaluate(std::span<const double> x) const {
    if (x.size() != k_) throw std::invalid_argument("flow length does not match plan");
    std::vector<double> gamma(k_, 1.0);
    for (const auto& r : rounds_) apply_round(r, x, gamma);
    return gamma;
  }

  /// Factors contributed by a single round at flow x.
  std::vector<double> round_factors(std::size_t round, std::span<const double> x) const {
    std::vector<double> gamma(k_, 1.0);
    apply_round(rounds_.at(round), x, gamma);
    return gamma;
  }

 private:
  void apply_round(const MatryoshkaRound& r, std::span<const double> x,
                   std::vector<double>& gamma) const {
    if (r.rule == RoundRule::static_split) {
      gamma[r.path] *= r.upper_factor();
      for (std::size_t j : r.high) gamma[j] *= r.upper_factor();
      for (std::size_t j : r.low) gamma[j] *= r.lower_factor();
      return;
    }
    double tail = 0.0;
    for (std::size_t j : r.remaining) tail += x[j];
    const double total = tail + x[r.path];
    double upper = 0.5;
    double lower = 0.5;
    if (total > 0.0) {
      upper = tail / total;
      lower = x[r.path] / total;
    }
    gamma[r.path] *= upper;
    for (std::size_t j : r.remaining) gamma[j] *= lower;
  }

  PlanKind kind_ = PlanKind::identity;
  std::size_t k_ = 0;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> position_;
  std::vector<MatryoshkaRound> rounds_;
  double utility_scale_ = 1.0;
};

}  // namespace infoshare
