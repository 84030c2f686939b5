#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace infoshare {

/// Two-tier side-payment rules. All per-path vectors are indexed by original
/// (0-based) path index; `order` lists paths by social utility weight,
/// descending, and defines the tier-two ranks 1..k.
///
/// Tier one moves every path to its rearranged cost c'_j (transfer
/// t_j = c'_j - c_j, positive means the user pays). Tier two charges each user
/// on a rank > omega path (tau + c'_{omega+1} - c'_j) and pays the pooled
/// amount Gamma back to rank <= omega paths in proportion to c'_i.
struct SidePaymentSchedule {
  std::vector<std::size_t> order;
  std::vector<double> original_costs;
  std::vector<double> rearranged_costs;
  std::vector<double> transfers;
  std::size_t omega = 0;
  double theta = 0.0;
  double tau = 0.0;
  bool two_path = false;

  std::size_t k() const noexcept { return order.size(); }

  /// Tier two is active only when both groups are non-empty.
  bool tier_two_active() const noexcept { return omega >= 1 && omega < k(); }

  /// Cost of the first charged path, c'_{omega+1}.
  double pivot_cost() const { return rearranged_costs.at(order.at(omega)); }

  bool rewarded(std::size_t path) const {
    for (std::size_t r = 0; r < omega; ++r)
      if (order[r] == path) return true;
    return false;
  }

  /// Per-user tier-two charge on a charged path (0 on rewarded paths).
  double charge(std::size_t path) const {
    if (!tier_two_active() || rewarded(path)) return 0.0;
    return tau + pivot_cost() - rearranged_costs.at(path);
  }

  /// Sum of c'_l over the rewarded group.
  double rewarded_cost_total() const {
    double c = 0.0;
    for (std::size_t r = 0; r < omega; ++r) c += rearranged_costs[order[r]];
    return c;
  }

  /// Gamma: total tier-two payment collected at flow x.
  double gamma_pool(std::span<const double> x) const {
    check(x);
    if (!tier_two_active()) return 0.0;
    double g = 0.0;
    for (std::size_t r = omega; r < k(); ++r) g += x[order[r]] * charge(order[r]);
    return g;
  }

  /// Per-user tier-two reward on a rewarded path at flow x. A rewarded path
  /// with no users and a positive pool yields +infinity.
  double reward(std::size_t path, std::span<const double> x) const {
    if (!tier_two_active() || !rewarded(path)) return 0.0;
    const double pool = gamma_pool(x);
    if (pool == 0.0) return 0.0;
    if (x[path] <= 0.0) return std::numeric_limits<double>::infinity();
    return rearranged_costs[path] * pool / (x[path] * rewarded_cost_total());
  }

  /// Net per-user cost on each path at flow x: c'_j + charge_j - reward_j.
  std::vector<double> effective_costs(std::span<const double> x) const {
    check(x);
    std::vector<double> out(k());
    const double pool = gamma_pool(x);
    const double ctot = tier_two_active() ? rewarded_cost_total() : 0.0;
    for (std::size_t r = 0; r < k(); ++r) {
      const std::size_t j = order[r];
      double c = rearranged_costs[j];
      if (tier_two_active()) {
        if (r >= omega) {
          c += charge(j);
        } else if (pool != 0.0) {
          c -= x[j] <= 0.0 ? std::numeric_limits<double>::infinity()
                           : rearranged_costs[j] * pool / (x[j] * ctot);
        }
      }
      out[j] = c;
    }
    return out;
  }

 private:
  void check(std::span<const double> x) const {
    if (x.size() != k()) throw std::invalid_argument("flow length does not match schedule");
  }
};

}  // namespace infoshare
