// icncache: command-line front end for hit-rate curves, cost tradeoffs,
// simulations, popularity laws, figure data and validation runs.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "icn/che.hpp"
#include "icn/errors.hpp"
#include "icn/figures.hpp"
#include "icn/popularity.hpp"
#include "icn/records_io.hpp"
#include "icn/scenario.hpp"
#include "icn/simulator.hpp"
#include "icn/tradeoff.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string format = "csv";
};

struct LawOptions {
  std::string kind = "zipf";
  double exponent = 0.8;
  double catalogue = 10'000;
  std::string path;
};

void add_law_options(CLI::App* cmd, LawOptions& law) {
  cmd->add_option("--law", law.kind, "zipf | empirical | file")
      ->check(CLI::IsMember({"zipf", "empirical", "file"}));
  cmd->add_option("--exponent", law.exponent, "Zipf exponent");
  cmd->add_option("--catalogue", law.catalogue, "catalogue size N in chunks");
  cmd->add_option("--law-file", law.path, "law CSV or object-record CSV (with --law file)");
}

icn::LawSpec to_spec(const LawOptions& o) {
  icn::LawSpec spec;
  spec.kind = o.kind;
  spec.exponent = o.exponent;
  if (!(o.catalogue >= 1.0) || o.catalogue > 9e18) {
    throw icn::InvalidArgument("catalogue must be >= 1");
  }
  spec.catalogue = static_cast<icn::Rank>(o.catalogue);
  spec.path = o.path;
  return spec;
}

icn::RunOptions run_options(const Globals& g) {
  icn::RunOptions o;
  o.out_dir = g.out;
  o.threads = g.threads;
  o.format = icn::parse_format(g.format);
  o.seed = g.seed;
  return o;
}

std::optional<icn::Scenario> config_scenario(const Globals& g) {
  if (g.config.empty()) return std::nullopt;
  return icn::load_scenario(g.config);
}

void report_paths(const fs::path& data, const fs::path& summary) {
  std::cout << "wrote " << data.string() << "\nwrote " << summary.string() << '\n';
}

// ---------------------------------------------------------------------------

int cmd_hitcurve(const Globals& g, const LawOptions& law, double from, double to,
                 int points, bool simulate, std::int64_t requests) {
  icn::Scenario s = config_scenario(g).value_or(icn::default_scenario());
  s.analysis = "hitcurve";
  if (g.config.empty()) {
    s.law = to_spec(law);
    s.sweep.variable = "c";
    s.sweep.values = icn::make_grid(from, to, points, from > 0.0);
    s.output.data = "hitcurve";
    s.output.summary = "hitcurve.json";
  }
  if (simulate) {
    s.simulation.enabled = true;
    s.simulation.requests = requests;
  }
  const icn::RunResult r = icn::run_scenario(s, run_options(g));
  report_paths(r.data_path, r.summary_path);
  return 0;
}

int cmd_tradeoff(const Globals& g, const LawOptions& law, bool law_given, double kb_scale,
                 std::optional<double> target, std::optional<double> beta) {
  icn::CostParams params = icn::CostParams::nominal();
  icn::LawSpec spec;
  spec.kind = "empirical";
  spec.catalogue = 1'600'000'000;
  if (auto s = config_scenario(g)) {
    params = s->cost;
    spec = s->law;
  }
  if (law_given) spec = to_spec(law);
  params.k_b *= kb_scale;
  if (target) params.overall_target = *target;
  if (beta) params.beta = *beta;
  params.validate();
  const icn::PopularityLaw p = icn::build_law(spec, params.chunk_bytes);
  const icn::CacheOptimum opt = icn::optimize_cache_size(p, params);

  icn::Table table{{"size", "cost_usd_per_month", "theta"}, {}};
  for (const auto& pt : opt.curve.points) table.rows.push_back({pt.size, pt.cost, pt.theta});
  const icn::RunOptions ro = run_options(g);
  const fs::path data = icn::write_table(table, ro.out_dir, "tradeoff", ro.format);
  const auto& first = opt.curve.points.front();
  const auto& last = opt.curve.points.back();
  const json summary{
      {"catalogue", p.catalogue_size()},
      {"gamma", icn::gamma(params, p.catalogue_size())},
      {"optimum",
       {{"cache_size", opt.cache_size},
        {"cache_bytes", opt.cache_size * static_cast<double>(params.chunk_bytes)},
        {"cost", opt.cost},
        {"theta", opt.theta},
        {"interior", opt.interior},
        {"kind", icn::to_string(opt.kind)}}},
      {"argmin_grid", opt.curve.argmin},
      {"endpoints",
       {{"first", {{"size", first.size}, {"cost", first.cost}}},
        {"last", {{"size", last.size}, {"cost", last.cost}}}}},
      {"max_feasible_size", opt.max_feasible_size}};
  const fs::path summary_path = ro.out_dir / "tradeoff.json";
  icn::write_json_file(summary, summary_path);
  report_paths(data, summary_path);
  std::cout << "optimum: C*=" << opt.cache_size << " chunks, cost=" << opt.cost
            << " $/month, theta=" << opt.theta << " (" << icn::to_string(opt.kind) << ")\n";
  return 0;
}

int cmd_sweep(const Globals& g) {
  if (g.config.empty()) throw icn::ParseError("sweep needs --config");
  const icn::RunResult r = icn::run_scenario(icn::load_scenario(g.config), run_options(g));
  report_paths(r.data_path, r.summary_path);
  return 0;
}

struct SimOptions {
  std::string policy = "lru";
  std::int64_t cache_size = 100;
  std::int64_t level2_size = 0;
  int partitions = 1;
  int sites = 0;
  std::int64_t requests = 1'000'000;
  int batches = 10;
  double warmup_factor = 5.0;
};

int cmd_simulate(const Globals& g, const LawOptions& law, const SimOptions& o) {
  const icn::PopularityLaw p = icn::build_law(to_spec(law));
  icn::SimConfig cfg;
  cfg.requests = o.requests;
  cfg.batches = o.batches;
  cfg.warmup.factor = o.warmup_factor;
  cfg.seed = g.seed.value_or(1);

  icn::SimResult r;
  json analytic;
  if (o.policy == "lru") {
    r = icn::simulate_lru(p, o.cache_size, cfg);
    analytic["theta"] = icn::overall_hit_rate(p, static_cast<double>(o.cache_size));
  } else if (o.policy == "load_sharing") {
    r = icn::simulate_load_sharing(p, o.cache_size, o.partitions, cfg);
  } else if (o.policy == "interaid") {
    const int sites = o.sites > 0 ? o.sites : o.partitions;
    r = icn::simulate_interaid(p, o.cache_size, o.partitions, sites, cfg);
    const icn::InteraidSolution sol =
        icn::interaid_hit_rates(p, static_cast<double>(o.cache_size), o.partitions);
    analytic = {{"theta_local", sol.theta_local}, {"theta_level1", sol.theta_level1}};
  } else {
    const int sites = o.sites > 0 ? o.sites : 1;
    r = icn::simulate_two_level(p, o.cache_size, o.level2_size, sites, cfg);
    analytic = {{"theta_level1", icn::overall_hit_rate(p, static_cast<double>(o.cache_size))},
                {"theta_overall", icn::two_level_hit_rate(p, static_cast<double>(o.cache_size),
                                                          static_cast<double>(o.level2_size))}};
  }
  auto est = [](const icn::Estimate& e) {
    return json{{"value", e.value}, {"half_width", e.half_width}};
  };
  icn::Table table{{"cache", "requests", "hits", "misses"}, {}};
  for (std::size_t i = 0; i < r.caches.size(); ++i) {
    const auto& c = r.caches[i];
    table.rows.push_back({static_cast<double>(i), static_cast<double>(c.requests),
                          static_cast<double>(c.hits), static_cast<double>(c.misses)});
  }
  const icn::RunOptions ro = run_options(g);
  const fs::path data = icn::write_table(table, ro.out_dir, "simulate", ro.format);
  const json summary{{"policy", o.policy},
                     {"seed", cfg.seed},
                     {"requests_measured", r.requests_measured},
                     {"warmup_requests", r.warmup_requests},
                     {"theta_local", est(r.theta_local)},
                     {"theta_level1", est(r.theta_level1)},
                     {"theta_overall", est(r.theta_overall)},
                     {"analytic", analytic}};
  const fs::path summary_path = ro.out_dir / "simulate.json";
  icn::write_json_file(summary, summary_path);
  report_paths(data, summary_path);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_popularity(const Globals& g, const LawOptions& law, const std::string& objects,
                   std::optional<double> floor, std::int64_t size_min, std::int64_t size_max) {
  std::optional<icn::PopularityLaw> p;
  if (!objects.empty()) {
    const auto records = icn::read_object_records_file(objects);
    p.emplace(floor ? icn::apply_impatience(records, *floor, size_min, size_max)
                    : icn::chunk_law_from_objects(records));
  } else {
    p.emplace(icn::build_law(to_spec(law)));
  }
  const fs::path dir = g.out;
  fs::create_directories(dir);
  const fs::path data = dir / "law.csv";
  std::ofstream out(data, std::ios::binary);
  if (!out) throw icn::Error("cannot write '" + data.string() + "'");
  icn::write_law_csv(out, *p);
  const fs::path summary_path = dir / "law.json";
  icn::write_json_file(icn::law_metadata(*p), summary_path);
  report_paths(data, summary_path);
  return 0;
}

std::string figure_name(const std::string& arg) {
  const std::string prefix = "figure=";
  return arg.rfind(prefix, 0) == 0 ? arg.substr(prefix.size()) : arg;
}

int cmd_reproduce(const Globals& g, std::vector<std::string> names, bool all,
                  std::int64_t requests) {
  if (all) names = icn::figure_names();
  if (names.empty()) {
    throw icn::InvalidArgument("name a figure (figure=NAME) or pass --all");
  }
  icn::FigureOptions fo;
  fo.out_dir = g.out;
  fo.threads = g.threads;
  fo.seed = g.seed.value_or(1);
  fo.sim_requests = requests;
  fo.format = icn::parse_format(g.format);
  for (const std::string& raw : names) {
    const icn::FigureResult r = icn::reproduce_figure(figure_name(raw), fo);
    report_paths(r.data_path, r.summary_path);
  }
  return 0;
}

int cmd_validate(const Globals& g, const std::string& target, std::int64_t requests) {
  const std::uint64_t seed = g.seed.value_or(1);
  json report;
  bool pass = true;
  auto check = [&](const std::string& name, double value, double limit) {
    const bool ok = value <= limit;
    report[name] = {{"max_gap", value}, {"limit", limit}, {"pass", ok}};
    pass = pass && ok;
  };
  const bool all = target == "all";
  if (all || target == "interaid") {
    const auto chk = icn::interaid_check(0.8, 10'000, 10, icn::interaid_validation_capacities(),
                                         requests, seed, g.threads);
    check("interaid", std::max(chk.max_gap_local, chk.max_gap_level1), 0.02);
  }
  if (all || target == "lru") {
    const auto chk = icn::lru_check(0.8, 10'000, {100, 1000, 3000}, requests, seed, g.threads);
    check("lru", chk.max_gap, 0.01);
  }
  if (all || target == "convergence") {
    const auto rep =
        icn::convergence_report({1'600'000, 160'000'000, 1'600'000'000}, g.threads);
    check("convergence", std::max(rep.max_gap[0], rep.max_gap[1]), 0.02);
  }
  if (report.empty()) {
    throw icn::InvalidArgument("unknown validation target '" + target + "'");
  }
  report["pass"] = pass;
  const fs::path path = fs::path(g.out) / ("validate-" + target + ".json");
  icn::write_json_file(report, path);
  std::cout << report.dump(2) << '\n';
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cache hit-rate and memory-bandwidth tradeoff toolkit", "icncache"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "scenario config (JSON)");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "random seed (U64)");
  app.add_option("--threads", g.threads, "worker threads (0: all processors)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--format", g.format, "data format")->check(CLI::IsMember({"csv", "json"}));

  LawOptions law;
  int exit_code = 0;

  auto* hit = app.add_subcommand("hitcurve", "hit rate against normalized cache size");
  add_law_options(hit, law);
  double from = 1e-3;
  double to = 1.0;
  int points = 16;
  bool simulate = false;
  std::int64_t hit_requests = 1'000'000;
  hit->add_option("--from", from, "smallest c");
  hit->add_option("--to", to, "largest c");
  hit->add_option("--points", points, "grid points (log-spaced when --from > 0)");
  hit->add_flag("--simulate", simulate, "add LRU simulation columns");
  hit->add_option("--requests", hit_requests, "simulated requests per point");

  auto* trade = app.add_subcommand("tradeoff", "optimal level-1 cache size");
  add_law_options(trade, law);
  double kb_scale = 1.0;
  std::optional<double> target;
  std::optional<double> beta;
  trade->add_option("--kb-scale", kb_scale, "multiply k_b");
  trade->add_option("--theta", target, "overall hit-rate target");
  trade->add_option("--beta", beta, "bandwidth cost exponent");

  auto* sweep = app.add_subcommand("sweep", "run the sweep described by --config");

  auto* sim = app.add_subcommand("simulate", "request-level LRU simulation");
  add_law_options(sim, law);
  SimOptions so;
  sim->add_option("--policy", so.policy)
      ->check(CLI::IsMember({"lru", "load_sharing", "interaid", "two_level"}));
  sim->add_option("--cache-size", so.cache_size, "level-1 cache size in chunks");
  sim->add_option("--level2-size", so.level2_size, "level-2 cache size (two_level)");
  sim->add_option("--partitions", so.partitions, "P");
  sim->add_option("--sites", so.sites, "S");
  sim->add_option("--requests", so.requests);
  sim->add_option("--batches", so.batches);
  sim->add_option("--warmup-factor", so.warmup_factor);

  auto* pop = app.add_subcommand("popularity", "export a popularity law");
  add_law_options(pop, law);
  std::string objects;
  std::optional<double> floor;
  std::int64_t size_min = 0;
  std::int64_t size_max = std::numeric_limits<std::int64_t>::max();
  pop->add_option("--objects", objects, "object-record CSV (object_id,leechers,size_bytes)");
  pop->add_option("--impatience", floor, "chunk popularity floor in (0, 1]");
  pop->add_option("--size-min", size_min, "smallest retained object (bytes)");
  pop->add_option("--size-max", size_max, "largest retained object (bytes)");

  auto* rep = app.add_subcommand("reproduce", "write figure data");
  std::vector<std::string> names;
  bool all = false;
  std::int64_t rep_requests = 10'000'000;
  rep->add_option("figures", names, "figure=NAME or NAME");
  rep->add_flag("--all", all, "every figure");
  rep->add_option("--requests", rep_requests, "simulated requests per point");

  auto* val = app.add_subcommand("validate", "simulation and convergence checks");
  std::string val_target = "interaid";
  std::int64_t val_requests = 10'000'000;
  val->add_option("target", val_target, "interaid | lru | convergence | all");
  val->add_option("--requests", val_requests, "simulated requests per point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*hit) exit_code = cmd_hitcurve(g, law, from, to, points, simulate, hit_requests);
    if (*trade) {
      exit_code = cmd_tradeoff(g, law, trade->count("--law") + trade->count("--catalogue") +
                                           trade->count("--exponent") > 0,
                               kb_scale, target, beta);
    }
    if (*sweep) exit_code = cmd_sweep(g);
    if (*sim) exit_code = cmd_simulate(g, law, so);
    if (*pop) exit_code = cmd_popularity(g, law, objects, floor, size_min, size_max);
    if (*rep) exit_code = cmd_reproduce(g, names, all, rep_requests);
    if (*val) exit_code = cmd_validate(g, val_target, val_requests);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return icn::exit_code_for(e);
  }
  return exit_code;
}
