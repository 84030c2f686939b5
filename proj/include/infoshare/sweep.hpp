#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "air.hpp"
#include "asp.hpp"
#include "equilibrium.hpp"
#include "evaluation.hpp"
#include "instance_io.hpp"
#include "numeric.hpp"
#include "payoff.hpp"
#include "sampling.hpp"

namespace infoshare {

enum class SweepMechanism { air, asp, none };

inline const char* to_string(SweepMechanism m) {
  switch (m) {
    case SweepMechanism::air: return "AIR";
    case SweepMechanism::asp: return "ASP";
    case SweepMechanism::none: return "none";
  }
  return "?";
}

/// Parses air|asp|none|all into the mechanisms to run, in fixed order.
inline std::vector<SweepMechanism> parse_mechanisms(const std::string& s) {
  if (s == "all") return {SweepMechanism::air, SweepMechanism::asp, SweepMechanism::none};
  if (s == "air") return {SweepMechanism::air};
  if (s == "asp") return {SweepMechanism::asp};
  if (s == "none") return {SweepMechanism::none};
  throw std::invalid_argument("mechanism must be air, asp, none or all");
}

// Sweep config file:
//
//   [sweep]
//   seed = 20240601
//   k = 6
//   m = 6
//   M = 2000
//   N = 3875,3426,2933,2116,3258,2116
//   weight_grid = 0.3,0.35,...
//   cost_grid = 10,20,...
//   instances_per_cell = 20
//   min_cost_weight_grid = 0.1667,0.25,...   # used by compare
struct SweepConfig {
  std::uint64_t seed = 1;
  std::size_t k = 6;
  std::size_t m = 6;
  int population = 2000;
  std::vector<int> capacities = la_poi_counts();
  std::vector<double> weight_grid;
  std::vector<double> cost_grid;
  std::size_t instances_per_cell = 20;
  std::vector<double> min_cost_weight_grid;

  void validate() const {
    if (k < 2 || m < 1) throw std::invalid_argument("need k >= 2 and m >= 1");
    if (capacities.size() != k) throw std::invalid_argument("N needs one entry per path");
    if (population < 1) throw std::invalid_argument("M must be positive");
    if (weight_grid.empty() || cost_grid.empty()) throw std::invalid_argument("grids must be non-empty");
    if (instances_per_cell < 1) throw std::invalid_argument("instances_per_cell must be >= 1");
    for (double c : cost_grid)
      if (!(c > 0.0)) throw std::invalid_argument("costs in cost_grid must be positive");
  }

  SampleSpec sample_spec(double max_cost) const {
    SampleSpec s;
    s.k = k;
    s.m = m;
    s.max_cost = max_cost;
    s.capacities = capacities;
    s.population = population;
    return s;
  }
};

inline SweepConfig parse_sweep_config(std::istream& in) {
  const auto doc = ConfigDocument::parse(in);
  if (!doc.has("sweep")) throw ParseError(0, "sweep", "missing section");
  SweepConfig c;
  bool have_n = false;
  for (const auto& [key, l] : doc.key_values("sweep")) {
    if (key == "seed") {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(l.text.data(), l.text.data() + l.text.size(), v);
      if (ec != std::errc() || p != l.text.data() + l.text.size()) throw ParseError(l.number, key, "not a u64");
      c.seed = v;
    } else if (key == "k") {
      c.k = static_cast<std::size_t>(parse_integer(l.text, l.number, key));
    } else if (key == "m") {
      c.m = static_cast<std::size_t>(parse_integer(l.text, l.number, key));
    } else if (key == "M") {
      c.population = static_cast<int>(parse_integer(l.text, l.number, key));
    } else if (key == "N") {
      c.capacities.clear();
      for (double v : parse_double_list(l, key)) c.capacities.push_back(static_cast<int>(v));
      have_n = true;
    } else if (key == "weight_grid") {
      c.weight_grid = parse_double_list(l, key);
    } else if (key == "cost_grid") {
      c.cost_grid = parse_double_list(l, key);
    } else if (key == "instances_per_cell") {
      c.instances_per_cell = static_cast<std::size_t>(parse_integer(l.text, l.number, key));
    } else if (key == "min_cost_weight_grid") {
      c.min_cost_weight_grid = parse_double_list(l, key);
    } else {
      throw ParseError(l.number, key, "unknown key in [sweep]");
    }
  }
  if (!have_n && c.k != la_poi_counts().size()) throw ParseError(0, "N", "N is required when k != 6");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, "sweep", e.what());
  }
  return c;
}

inline SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sweep config " + path);
  return parse_sweep_config(in);
}

/// Seed of cell (w, c), derived from the values so that a cell's stream does
/// not depend on which other cells are in the grid.
inline std::uint64_t cell_seed(std::uint64_t seed, double weight, double cost) {
  return splitmix64(seed ^ splitmix64(std::bit_cast<std::uint64_t>(weight)) ^
                    splitmix64(std::bit_cast<std::uint64_t>(cost) * 0x9E3779B97F4A7C15ULL));
}

inline std::uint64_t instance_seed(std::uint64_t cell, std::size_t t) { return splitmix64(cell + t); }

struct MechanismWelfare {
  double welfare = 0.0;
  double realized = 0.0;
  bool converged = true;
};

/// Welfare of one instance under one mechanism, as used by the sweeps.
/// AIR: Matryoshka fractions, damped dynamics from the uniform split.
/// ASP: closed-form thresholds, uniform charged split.
/// none: everyone on the cheapest path.
inline MechanismWelfare mechanism_welfare(const GameInstance& g, SweepMechanism mech) {
  MechanismWelfare out;
  switch (mech) {
    case SweepMechanism::air: {
      const auto plan = matryoshka_fractions(g);
      const auto r = air_equilibrium_welfare(g, plan);
      out.welfare = r.welfare;
      out.realized = r.realized_welfare;
      out.converged = r.equilibrium.converged;
      break;
    }
    case SweepMechanism::asp: {
      const auto s = g.k() == 2 ? two_path_schedule(g, two_path_optimal_tau(g).tau_star) : closed_form_schedule(g);
      const auto r = asp_equilibrium(g, s, 1.0);
      out.welfare = r.representative.welfare;
      out.realized = realized_welfare(g, r.representative.assignment, s);
      out.converged = r.representative.converged;
      break;
    }
    case SweepMechanism::none: {
      const auto r = no_incentive_equilibrium(g);
      out.welfare = r.welfare;
      out.realized = out.welfare;
      out.converged = r.converged;
      break;
    }
  }
  return out;
}

struct SweepCell {
  double max_weight = 0.0;
  double max_cost = 0.0;
  SweepMechanism mechanism = SweepMechanism::none;
  double ratio_mean = 0.0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  std::size_t n = 0;
  std::size_t converged = 0;
  double realized_mean = 0.0;
  double seconds = 0.0;
};

struct SweepResult {
  std::uint64_t seed = 0;
  std::vector<SweepCell> cells;  // ordered by (weight, cost, mechanism) as in the config
};

/// Runs cells in parallel; results are stored by cell index so output order
/// never depends on scheduling.
template <class CellFn>
void parallel_cells(std::size_t count, std::size_t threads, CellFn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t c = 0; c < count; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t c; (c = next.fetch_add(1)) < count;) fn(c);
      } catch (...) {
        errors[t] = std::current_exception();
        next.store(count);
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Mean, min and max of welfare / UB over seeded instances for every
/// (max weight, max cost, mechanism) cell.
inline SweepResult run_sweep(const SweepConfig& cfg, const std::vector<SweepMechanism>& mechanisms,
                             std::size_t threads = 1) {
  cfg.validate();
  if (mechanisms.empty()) throw std::invalid_argument("no mechanisms selected");
  const std::size_t nw = cfg.weight_grid.size();
  const std::size_t nc = cfg.cost_grid.size();
  SweepResult res;
  res.seed = cfg.seed;
  res.cells.resize(nw * nc * mechanisms.size());
  parallel_cells(nw * nc, threads, [&](std::size_t cell) {
    const auto t0 = std::chrono::steady_clock::now();
    const double w = cfg.weight_grid[cell / nc];
    const double c = cfg.cost_grid[cell % nc];
    const auto spec = cfg.sample_spec(c);
    const std::uint64_t cs = cell_seed(cfg.seed, w, c);
    std::vector<std::vector<double>> ratios(mechanisms.size());
    std::vector<std::vector<double>> realized(mechanisms.size());
    std::vector<std::size_t> conv(mechanisms.size(), 0);
    for (std::size_t t = 0; t < cfg.instances_per_cell; ++t) {
      const auto g = sample_instance(instance_seed(cs, t), spec, w);
      const double ub = welfare_upper_bound(g).ub;
      for (std::size_t q = 0; q < mechanisms.size(); ++q) {
        const auto r = mechanism_welfare(g, mechanisms[q]);
        ratios[q].push_back(r.welfare / ub);
        realized[q].push_back(r.realized / ub);
        if (r.converged) ++conv[q];
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (std::size_t q = 0; q < mechanisms.size(); ++q) {
      SweepCell& out = res.cells[cell * mechanisms.size() + q];
      out.max_weight = w;
      out.max_cost = c;
      out.mechanism = mechanisms[q];
      out.n = ratios[q].size();
      out.ratio_mean = exact_sum(ratios[q]) / static_cast<double>(out.n);
      out.ratio_min = *std::min_element(ratios[q].begin(), ratios[q].end());
      out.ratio_max = *std::max_element(ratios[q].begin(), ratios[q].end());
      out.realized_mean = exact_sum(realized[q]) / static_cast<double>(out.n);
      out.converged = conv[q];
      out.seconds = secs;
    }
  });
  return res;
}

inline std::string format_fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// Columns: max_weight,max_cost,mechanism,ratio_mean,ratio_min,ratio_max,n,converged,realized_mean
inline void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "max_weight,max_cost,mechanism,ratio_mean,ratio_min,ratio_max,n,converged,realized_mean\n";
  for (const auto& c : r.cells) {
    out << format_fixed(c.max_weight) << ',' << format_fixed(c.max_cost) << ',' << to_string(c.mechanism) << ','
        << format_fixed(c.ratio_mean) << ',' << format_fixed(c.ratio_min) << ',' << format_fixed(c.ratio_max)
        << ',' << c.n << ',' << c.converged << ',' << format_fixed(c.realized_mean) << '\n';
  }
}

/// Wall-clock seconds per (weight, cost) cell, kept apart from the CSV so the
/// CSV stays reproducible.
inline void write_sweep_timing(std::ostream& out, const SweepResult& r) {
  out << "max_weight,max_cost,seconds\n";
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto& c = r.cells[i];
    if (i > 0 && r.cells[i - 1].max_weight == c.max_weight && r.cells[i - 1].max_cost == c.max_cost) continue;
    out << format_fixed(c.max_weight) << ',' << format_fixed(c.max_cost) << ',' << format_fixed(c.seconds, 3)
        << '\n';
  }
}

struct CompareCell {
  double min_cost_weight = 0.0;
  double max_cost = 0.0;
  double air_over_none = 0.0;
  double asp_over_none = 0.0;
  double ub_over_none = 0.0;  // ceiling any mechanism could reach under the bound
  std::size_t n = 0;
  std::size_t converged = 0;
};

struct CompareResult {
  std::uint64_t seed = 0;
  std::vector<CompareCell> cells;
};

/// Mean welfare ratios against the no-incentive outcome while the cheapest
/// path's social utility weight varies.
inline CompareResult compare_no_incentive(const SweepConfig& cfg, std::vector<double> min_cost_weight_grid = {},
                                          std::size_t threads = 1) {
  cfg.validate();
  if (min_cost_weight_grid.empty()) min_cost_weight_grid = cfg.min_cost_weight_grid;
  if (min_cost_weight_grid.empty()) throw std::invalid_argument("min-cost weight grid is empty");
  const double floor = 1.0 / static_cast<double>(cfg.k);
  for (double w : min_cost_weight_grid) {
    if (!(w >= floor - 1e-3 && w < 1.0)) throw std::invalid_argument("min-cost weights must lie in [1/k, 1)");
  }
  const std::size_t nw = min_cost_weight_grid.size();
  const std::size_t nc = cfg.cost_grid.size();
  CompareResult res;
  res.seed = cfg.seed;
  res.cells.resize(nw * nc);
  parallel_cells(nw * nc, threads, [&](std::size_t cell) {
    const double w = min_cost_weight_grid[cell / nc];
    const double c = cfg.cost_grid[cell % nc];
    const auto spec = cfg.sample_spec(c);
    const std::uint64_t cs = cell_seed(cfg.seed ^ 0xC0FFEEULL, w, c);
    std::vector<double> air;
    std::vector<double> asp;
    std::vector<double> ub;
    std::size_t conv = 0;
    for (std::size_t t = 0; t < cfg.instances_per_cell; ++t) {
      const auto g = sample_instance_min_cost_weight(instance_seed(cs, t), spec, w);
      const double none = mechanism_welfare(g, SweepMechanism::none).welfare;
      const auto a = mechanism_welfare(g, SweepMechanism::air);
      const auto s = mechanism_welfare(g, SweepMechanism::asp);
      air.push_back(a.welfare / none);
      asp.push_back(s.welfare / none);
      ub.push_back(welfare_upper_bound(g).ub / none);
      if (a.converged && s.converged) ++conv;
    }
    CompareCell& out = res.cells[cell];
    out.min_cost_weight = w;
    out.max_cost = c;
    out.n = air.size();
    out.air_over_none = exact_sum(air) / static_cast<double>(out.n);
    out.asp_over_none = exact_sum(asp) / static_cast<double>(out.n);
    out.ub_over_none = exact_sum(ub) / static_cast<double>(out.n);
    out.converged = conv;
  });
  return res;
}

/// Columns: min_cost_weight,max_cost,air_over_none,asp_over_none,ub_over_none,n,converged
inline void write_compare_csv(std::ostream& out, const CompareResult& r) {
  out << "min_cost_weight,max_cost,air_over_none,asp_over_none,ub_over_none,n,converged\n";
  for (const auto& c : r.cells) {
    out << format_fixed(c.min_cost_weight) << ',' << format_fixed(c.max_cost) << ','
        << format_fixed(c.air_over_none) << ',' << format_fixed(c.asp_over_none) << ','
        << format_fixed(c.ub_over_none) << ',' << c.n << ',' << c.converged << '\n';
  }
}

}  // namespace infoshare
