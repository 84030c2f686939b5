#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "infoshare/infoshare.hpp"

using namespace infoshare;

namespace {

std::string fmt(double v, int digits = 6) { return format_fixed(v, digits); }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

// Equilibrium record: epsilon, welfare, flow, then one assignment row per type.
void print_equilibrium(std::ostream& os, const std::string& label, const EquilibriumResult& r) {
  os << label << ":\n";
  os << "  epsilon   = " << r.epsilon << (r.converged ? "" : "  (not converged)") << "\n";
  os << "  welfare   = " << fmt(r.welfare) << "\n";
  os << "  flow      =";
  for (double x : r.flow.values()) os << ' ' << fmt(x);
  os << "\n  assignment\n";
  for (std::size_t i = 0; i < r.assignment.types(); ++i) {
    os << "    type " << i + 1 << ":";
    for (std::size_t j = 0; j < r.assignment.paths(); ++j) os << ' ' << fmt(r.assignment(i, j));
    os << "\n";
  }
}

void print_instance_header(const GameInstance& g) {
  std::cout << "paths = " << g.k() << ", types = " << g.m() << ", cost shift = " << g.cost_shift()
            << ", max c / U(1) = " << g.cost_scale_ratio() << "\n";
  std::cout << "utility weights:";
  for (std::size_t j = 0; j < g.k(); ++j) std::cout << ' ' << fmt(g.utility_weight(j));
  std::cout << "\n";
}

int run_air(const std::string& instance_path, const std::string& csv_path) {
  const auto g = load_instance(instance_path);
  print_instance_header(g);
  PenaltyFractionPlan plan;
  if (g.k() == 2 && g.m() == 2) {
    plan = two_path_two_type_fractions(g);
  } else {
    plan = matryoshka_fractions(g);
  }
  std::cout << "plan: " << to_string(plan.kind()) << ", order:";
  for (std::size_t j : plan.order()) std::cout << " P" << j + 1;
  std::cout << "\n";
  for (const auto& r : plan.rounds()) {
    std::cout << "round " << r.lambda << ": P" << r.path + 1 << " vs {";
    for (std::size_t t = 0; t < r.remaining.size(); ++t) std::cout << (t ? "," : "") << "P" << r.remaining[t] + 1;
    std::cout << "}  L={";
    for (std::size_t t = 0; t < r.low.size(); ++t) std::cout << (t ? "," : "") << "P" << r.low[t] + 1;
    std::cout << "} H={";
    for (std::size_t t = 0; t < r.high.size(); ++t) std::cout << (t ? "," : "") << "P" << r.high[t] + 1;
    std::cout << "}";
    if (r.psi) std::cout << " psi=P" << *r.psi + 1;
    std::cout << "  " << to_string(r.rule);
    if (r.root) std::cout << " root=" << fmt(*r.root);
    if (r.rule == RoundRule::static_split) {
      std::cout << " factors=(" << fmt(r.upper_factor()) << ", " << fmt(r.lower_factor()) << ")";
    }
    std::cout << "\n";
  }
  const auto out = air_equilibrium_welfare(g, plan);
  const auto gamma = plan.evaluate(out.equilibrium.flow.values());
  std::cout << "fractions at equilibrium:";
  for (double v : gamma) std::cout << ' ' << fmt(v);
  std::cout << "\n";
  print_equilibrium(std::cout, "equilibrium", out.equilibrium);
  std::cout << "welfare (unrestricted) = " << fmt(out.welfare) << "\n";
  std::cout << "welfare (realized)     = " << fmt(out.realized_welfare) << "\n";
  if (!csv_path.empty()) {
    auto f = open_out(csv_path);
    f << "round,path,rule,root,upper_factor,lower_factor\n";
    for (const auto& r : plan.rounds()) {
      f << r.lambda << ',' << r.path + 1 << ',' << to_string(r.rule) << ',' << (r.root ? fmt(*r.root) : "") << ','
        << fmt(r.upper_factor()) << ',' << fmt(r.lower_factor()) << '\n';
    }
  }
  return 0;
}

int run_asp(const std::string& instance_path, const std::string& csv_path) {
  const auto g = load_instance(instance_path);
  print_instance_header(g);
  SidePaymentSchedule s;
  if (g.k() == 2) {
    const auto pr = two_path_optimal_tau(g);
    std::cout << "two-path threshold: tau* = " << fmt(pr.tau_star) << (pr.fallback ? " (fallback)" : "") << "\n";
    s = two_path_schedule(g, pr.tau_star);
  } else {
    s = closed_form_schedule(g);
    std::cout << "tier one:\n  path   cost   rearranged   transfer\n";
    for (std::size_t j = 0; j < g.k(); ++j) {
      std::cout << "  P" << j + 1 << "  " << fmt(s.original_costs[j], 4) << "  " << fmt(s.rearranged_costs[j], 4)
                << "  " << fmt(s.transfers[j], 4) << "\n";
    }
    std::cout << "theta* = " << fmt(s.theta) << ", tau* = " << fmt(s.tau) << ", omega = " << s.omega
              << (s.tier_two_active() ? "" : " (tier two inactive)") << "\n";
  }
  const auto eq = asp_equilibrium(g, s);
  const auto x = eq.representative.flow.values();
  std::cout << "Gamma at representative equilibrium = " << fmt(s.gamma_pool(x)) << "\n";
  print_equilibrium(std::cout, "representative equilibrium", eq.representative);
  print_equilibrium(std::cout, "worst equilibrium", eq.worst);
  const auto led = budget_ledger(s, x);
  std::cout << "ledger (representative):\n  path  mass  t_j  charge  reward\n";
  for (const auto& e : led.entries) {
    std::cout << "  P" << e.path + 1 << "  " << fmt(e.mass) << "  " << fmt(e.tier1_per_user, 4) << "  "
              << fmt(e.tier2_charge_per_user, 4) << "  " << fmt(e.tier2_reward_per_user, 4) << "\n";
  }
  std::cout << "  tier-one per-capita net = " << led.tier1_per_capita_net << "\n";
  std::cout << "  tier-two charged = " << fmt(led.tier2_charged_total) << ", rewarded = " << fmt(led.tier2_rewarded_total)
            << "\n";
  const double none = no_incentive_equilibrium(g).welfare;
  std::cout << "SW_ASP / SW_none (representative) = " << fmt(eq.representative.welfare / none) << "\n";
  std::cout << "SW_ASP / SW_none (worst)          = " << fmt(eq.worst.welfare / none) << "\n";
  if (g.utility().mode() == UtilityModel::Mode::per_path) {
    std::cout << "SW_ASP / UB (representative)      = " << fmt(eq.representative.welfare / welfare_upper_bound(g).ub)
              << "\n";
  }
  if (!csv_path.empty()) {
    auto f = open_out(csv_path);
    f << "path,cost,rearranged_cost,transfer,mass,charge,reward\n";
    for (std::size_t j = 0; j < g.k(); ++j) {
      f << j + 1 << ',' << fmt(s.original_costs[j]) << ',' << fmt(s.rearranged_costs[j]) << ','
        << fmt(s.transfers[j]) << ',' << fmt(x[j]) << ',' << fmt(s.charge(j)) << ','
        << (x[j] > 0.0 ? fmt(s.reward(j, x)) : std::string()) << '\n';
    }
  }
  return 0;
}

int run_eval(const std::string& instance_path, double step, const std::string& csv_path) {
  const auto g = load_instance(instance_path);
  print_instance_header(g);
  const auto opt = social_optimum_grid(g, step);
  std::cout << "SW* = " << fmt(opt.sw_star) << " (grid step " << opt.grid_step << ", gap <= " << fmt(opt.certified_gap)
            << ")\n";
  std::optional<double> ub;
  if (g.utility().mode() == UtilityModel::Mode::per_path) {
    ub = welfare_upper_bound(g).ub;
    std::cout << "UB  = " << fmt(*ub) << "\n";
  } else {
    std::cout << "UB  = n/a (common utility mode)\n";
  }
  struct Row {
    std::string name;
    PoaReport report;
  };
  std::vector<Row> rows;
  rows.push_back({"none", price_of_anarchy(g, NoMechanism{}, step)});
  rows.push_back({"AIR", price_of_anarchy(g, matryoshka_fractions(g), step)});
  if (g.k() >= 3) {
    rows.push_back({"ASP", price_of_anarchy(g, closed_form_schedule(g), step)});
  } else {
    rows.push_back({"ASP", price_of_anarchy(g, two_path_schedule(g, two_path_optimal_tau(g).tau_star), step)});
  }
  for (const auto& r : rows) {
    std::cout << "PoA(" << r.name << ") = " << fmt(r.report.poa) << "  worst welfare " << fmt(r.report.worst_welfare)
              << "  equilibria " << r.report.equilibria << "\n";
  }
  if (!csv_path.empty()) {
    auto f = open_out(csv_path);
    f << "mechanism,poa,worst_welfare,sw_star,certified_gap,ub\n";
    for (const auto& r : rows) {
      f << r.name << ',' << fmt(r.report.poa) << ',' << fmt(r.report.worst_welfare) << ',' << fmt(opt.sw_star) << ','
        << fmt(opt.certified_gap) << ',' << (ub ? fmt(*ub) : std::string()) << '\n';
    }
  }
  return 0;
}

int run_ingest(const std::string& input, const std::string& bbox, const std::string& columns,
               const std::string& corridors, double snap) {
  const auto box = bbox.empty() ? central_la_box() : BoundingBox::parse(bbox);
  const auto spec = columns.empty() ? ColumnSpec{} : ColumnSpec::parse(columns);
  const auto res = ingest_poi_csv(input, box, spec);
  std::cout << "rows " << res.rows << ", inside " << res.records.size() << ", outside " << res.outside
            << ", malformed " << res.malformed << ", duplicates " << res.duplicates << "\n";
  if (!corridors.empty()) {
    const auto cs = load_corridors(corridors);
    const auto counts = assign_pois_to_corridors(res.records, cs, snap);
    for (std::size_t c = 0; c < cs.size(); ++c) std::cout << cs[c].name << ',' << counts.counts[c] << "\n";
    std::cout << "unassigned," << counts.unassigned << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Routing games with information-sharing incentives"};
  app.require_subcommand(1);

  std::string instance;
  std::string csv;
  auto* air = app.add_subcommand("air", "AIR fraction plan and equilibrium");
  air->add_option("--instance", instance, "instance file")->required()->check(CLI::ExistingFile);
  air->add_option("--csv", csv, "write the round trace as CSV");

  auto* asp = app.add_subcommand("asp", "ASP schedule, equilibria and ledger");
  asp->add_option("--instance", instance, "instance file")->required()->check(CLI::ExistingFile);
  asp->add_option("--csv", csv, "write the per-path schedule as CSV");

  double step = 0.01;
  auto* eval = app.add_subcommand("eval", "optimum, upper bound and price of anarchy");
  eval->add_option("--instance", instance, "instance file")->required()->check(CLI::ExistingFile);
  eval->add_option("--step", step, "grid step")->check(CLI::Range(1e-6, 1.0));
  eval->add_option("--csv", csv, "write the report as CSV");

  std::string input;
  std::string bbox;
  std::string columns;
  std::string corridors;
  double snap = 250.0;
  auto* ingest = app.add_subcommand("ingest", "filter PoI records and count them per corridor");
  ingest->add_option("--input", input, "delimited PoI file")->required();
  ingest->add_option("--bbox", bbox, "lat_min,lat_max,lon_min,lon_max (default: central LA)");
  ingest->add_option("--columns", columns, "id=<col>,lat=<col>,lon=<col>[,delim=<c>][,header=0|1][,dedupe=0|1]");
  ingest->add_option("--corridors", corridors, "corridor polyline file");
  ingest->add_option("--snap", snap, "max snap distance in meters")->check(CLI::PositiveNumber);

  std::string config;
  std::string out;
  std::string timing;
  std::string mechanism = "all";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  auto* sweep = app.add_subcommand("sweep", "welfare / UB heatmap sweep");
  sweep->add_option("--config", config, "sweep config")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "output CSV")->required();
  auto* seed_opt = sweep->add_option("--seed", seed, "overrides the config seed");
  sweep->add_option("--mechanism", mechanism, "air|asp|none|all")
      ->check(CLI::IsMember({"air", "asp", "none", "all"}));
  sweep->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--timing", timing, "write per-cell wall-clock seconds here");

  auto* compare = app.add_subcommand("compare", "mechanisms against the no-incentive outcome");
  compare->add_option("--config", config, "sweep config")->required()->check(CLI::ExistingFile);
  compare->add_option("--out", out, "output CSV")->required();
  compare->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (air->parsed()) return run_air(instance, csv);
    if (asp->parsed()) return run_asp(instance, csv);
    if (eval->parsed()) return run_eval(instance, step, csv);
    if (ingest->parsed()) return run_ingest(input, bbox, columns, corridors, snap);
    if (sweep->parsed()) {
      auto cfg = load_sweep_config(config);
      if (seed_opt->count() > 0) cfg.seed = seed;
      const auto res = run_sweep(cfg, parse_mechanisms(mechanism), threads);
      auto f = open_out(out);
      write_sweep_csv(f, res);
      if (!timing.empty()) {
        auto t = open_out(timing);
        write_sweep_timing(t, res);
      }
      std::cout << "wrote " << res.cells.size() << " rows to " << out << "\n";
      return 0;
    }
    if (compare->parsed()) {
      const auto cfg = load_sweep_config(config);
      const auto res = compare_no_incentive(cfg, {}, threads);
      auto f = open_out(out);
      write_compare_csv(f, res);
      std::cout << "wrote " << res.cells.size() << " rows to " << out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
