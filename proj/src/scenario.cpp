#include "icn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string_view>

#include "icn/che.hpp"
#include "icn/errors.hpp"
#include "icn/records_io.hpp"
#include "icn/simulator.hpp"

namespace icn {
namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ParseError(where + ": unknown key '" + item.key() + "'");
    }
  }
}

double get_number(const json& obj, const std::string& where, const char* key,
                  double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) {
    throw ParseError(where + "." + key + ": expected a number");
  }
  return it->get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& where,
                         const char* key, std::int64_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (it->is_number_integer()) return it->get<std::int64_t>();
  if (it->is_number_float()) {
    const double v = it->get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e18) {
      return static_cast<std::int64_t>(v);
    }
  }
  throw ParseError(where + "." + key + ": expected an integer");
}

std::string get_string(const json& obj, const std::string& where,
                       const char* key, const std::string& fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) throw ParseError(where + "." + key + ": expected a string");
  return it->get<std::string>();
}

bool get_bool(const json& obj, const std::string& where, const char* key,
              bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw ParseError(where + "." + key + ": expected true or false");
  return it->get<bool>();
}

int get_int32(const json& obj, const std::string& where, const char* key,
              int fallback) {
  const std::int64_t v = get_integer(obj, where, key, fallback);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ParseError(where + "." + key + ": out of range");
  }
  return static_cast<int>(v);
}

LawSpec parse_law(const json& obj) {
  check_keys(obj, "law", {"kind", "exponent", "catalogue", "path"});
  LawSpec out;
  out.kind = get_string(obj, "law", "kind", out.kind);
  out.exponent = get_number(obj, "law", "exponent", out.exponent);
  out.catalogue = get_integer(obj, "law", "catalogue", out.catalogue);
  out.path = get_string(obj, "law", "path", out.path);
  return out;
}

CostParams parse_cost(const json& obj) {
  check_keys(obj, "cost",
             {"k_b", "k_m", "k_s", "k_b_prime", "traffic_mbps", "sites",
              "overall_target", "beta", "chunk_bytes", "count_constant_level2"});
  CostParams out;
  out.k_b = get_number(obj, "cost", "k_b", out.k_b);
  out.k_m = get_number(obj, "cost", "k_m", out.k_m);
  out.k_s = get_number(obj, "cost", "k_s", out.k_s);
  out.k_b_prime = get_number(obj, "cost", "k_b_prime", out.k_b_prime);
  out.traffic_mbps = get_number(obj, "cost", "traffic_mbps", out.traffic_mbps);
  out.sites = get_int32(obj, "cost", "sites", out.sites);
  out.overall_target = get_number(obj, "cost", "overall_target", out.overall_target);
  out.beta = get_number(obj, "cost", "beta", out.beta);
  out.chunk_bytes = get_integer(obj, "cost", "chunk_bytes", out.chunk_bytes);
  out.count_constant_level2 =
      get_bool(obj, "cost", "count_constant_level2", out.count_constant_level2);
  return out;
}

SweepSpec parse_sweep(const json& obj) {
  if (!obj.is_object() || obj.size() != 1) {
    throw ParseError("sweep: expected exactly one variable");
  }
  SweepSpec out;
  const auto item = obj.begin();
  out.variable = item.key();
  const json& grid = item.value();
  const std::string where = "sweep." + out.variable;
  if (grid.is_array()) {
    for (const json& v : grid) {
      if (!v.is_number()) throw ParseError(where + ": grid values must be numbers");
      out.values.push_back(v.get<double>());
    }
  } else if (grid.is_object()) {
    check_keys(grid, where, {"from", "to", "points", "spacing"});
    for (const char* key : {"from", "to", "points"}) {
      if (!grid.contains(key)) throw ParseError(where + ": missing '" + key + "'");
    }
    const std::string spacing = get_string(grid, where, "spacing", "linear");
    if (spacing != "linear" && spacing != "log") {
      throw ParseError(where + ".spacing: expected 'linear' or 'log'");
    }
    try {
      out.values = make_grid(get_number(grid, where, "from", 0.0),
                             get_number(grid, where, "to", 0.0),
                             get_int32(grid, where, "points", 0), spacing == "log");
    } catch (const InvalidArgument& e) {
      throw ParseError(where + ": " + e.what());
    }
  } else {
    throw ParseError(where + ": expected a list or a range object");
  }
  return out;
}

SimulationSpec parse_simulation(const json& obj) {
  check_keys(obj, "simulation",
             {"enabled", "requests", "batches", "warmup_factor", "sites"});
  SimulationSpec out;
  out.enabled = get_bool(obj, "simulation", "enabled", out.enabled);
  out.requests = get_integer(obj, "simulation", "requests", out.requests);
  out.batches = get_int32(obj, "simulation", "batches", out.batches);
  out.warmup_factor = get_number(obj, "simulation", "warmup_factor", out.warmup_factor);
  out.sites = get_int32(obj, "simulation", "sites", out.sites);
  return out;
}

OutputSpec parse_output(const json& obj) {
  check_keys(obj, "output", {"data", "summary"});
  OutputSpec out;
  out.data = get_string(obj, "output", "data", out.data);
  out.summary = get_string(obj, "output", "summary", out.summary);
  return out;
}

bool is_one_of(const std::string& v, std::initializer_list<std::string_view> options) {
  return std::find(options.begin(), options.end(), v) != options.end();
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

SimConfig sim_config(const SimulationSpec& spec, std::uint64_t seed) {
  SimConfig cfg;
  cfg.requests = spec.requests;
  cfg.batches = spec.batches;
  cfg.warmup.factor = spec.warmup_factor;
  cfg.seed = seed;
  return cfg;
}

std::int64_t whole_chunks(double size) {
  return static_cast<std::int64_t>(std::llround(size));
}

}  // namespace

PopularityLaw build_law(const LawSpec& spec, std::int64_t chunk_bytes) {
  if (spec.kind == "zipf") return build_zipf(spec.exponent, spec.catalogue);
  if (spec.kind == "empirical") return build_empirical(spec.catalogue);
  if (spec.kind == "file") return load_law_file(spec.path, chunk_bytes);
  throw InvalidArgument("unknown law kind '" + spec.kind + "'");
}

std::vector<double> make_grid(double from, double to, int points,
                              bool log_spacing) {
  if (points < 1) throw InvalidArgument("grid needs at least one point");
  if (!(from <= to) || !std::isfinite(from) || !std::isfinite(to)) {
    throw InvalidArgument("grid bounds must be finite with from <= to");
  }
  if (log_spacing && !(from > 0.0)) {
    throw InvalidArgument("log grid needs from > 0");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(points));
  if (points == 1) {
    out.push_back(from);
    return out;
  }
  for (int i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / (points - 1);
    out.push_back(log_spacing ? from * std::pow(to / from, f) : from + (to - from) * f);
  }
  out.back() = to;
  return out;
}

Scenario default_scenario() {
  Scenario s;
  s.sweep.variable = "c";
  s.sweep.values = make_grid(1e-3, 1.0, 16, true);
  return s;
}

Scenario parse_scenario(const json& doc) {
  check_keys(doc, "scenario",
             {"analysis", "law", "cost", "gamma", "kb_ratio", "partitions",
              "sweep", "simulation", "output", "seed"});
  Scenario s;
  s.analysis = get_string(doc, "scenario", "analysis", s.analysis);
  if (doc.contains("law")) s.law = parse_law(doc.at("law"));
  if (doc.contains("cost")) s.cost = parse_cost(doc.at("cost"));
  if (doc.contains("gamma") && !doc.at("gamma").is_null()) {
    s.gamma = get_number(doc, "scenario", "gamma", 0.0);
  }
  s.kb_ratio = get_number(doc, "scenario", "kb_ratio", s.kb_ratio);
  s.partitions = get_int32(doc, "scenario", "partitions", s.partitions);
  if (!doc.contains("sweep")) throw ParseError("scenario: missing 'sweep'");
  s.sweep = parse_sweep(doc.at("sweep"));
  if (doc.contains("simulation")) s.simulation = parse_simulation(doc.at("simulation"));
  if (doc.contains("output")) s.output = parse_output(doc.at("output"));
  if (doc.contains("seed")) {
    const json& v = doc.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ParseError("scenario.seed: expected a non-negative integer");
    }
    s.seed = v.get<std::uint64_t>();
  }
  try {
    validate_scenario(s);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_scenario(doc);
}

json to_json(const Scenario& s) {
  json law = {{"kind", s.law.kind}};
  if (s.law.kind == "zipf") law["exponent"] = s.law.exponent;
  if (s.law.kind != "file") law["catalogue"] = s.law.catalogue;
  if (s.law.kind == "file") law["path"] = s.law.path;
  const CostParams& c = s.cost;
  return json{
      {"analysis", s.analysis},
      {"law", law},
      {"cost",
       {{"k_b", c.k_b},
        {"k_m", c.k_m},
        {"k_s", c.k_s},
        {"k_b_prime", c.k_b_prime},
        {"traffic_mbps", c.traffic_mbps},
        {"sites", c.sites},
        {"overall_target", c.overall_target},
        {"beta", c.beta},
        {"chunk_bytes", c.chunk_bytes},
        {"count_constant_level2", c.count_constant_level2}}},
      {"gamma", s.gamma ? json(*s.gamma) : json(nullptr)},
      {"kb_ratio", s.kb_ratio},
      {"partitions", s.partitions},
      {"sweep", {{s.sweep.variable, s.sweep.values}}},
      {"simulation",
       {{"enabled", s.simulation.enabled},
        {"requests", s.simulation.requests},
        {"batches", s.simulation.batches},
        {"warmup_factor", s.simulation.warmup_factor},
        {"sites", s.simulation.sites}}},
      {"output", {{"data", s.output.data}, {"summary", s.output.summary}}},
      {"seed", s.seed}};
}

void validate_scenario(const Scenario& s) {
  if (!is_one_of(s.analysis, {"hitcurve", "tradeoff", "normalized", "load_sharing",
                              "cooperative", "interaid"})) {
    throw InvalidArgument("unknown analysis '" + s.analysis + "'");
  }
  if (s.law.kind == "zipf") {
    if (!(s.law.exponent >= 0.0)) throw InvalidArgument("zipf exponent must be >= 0");
    if (s.law.catalogue < 1) throw InvalidArgument("catalogue must be >= 1");
  } else if (s.law.kind == "empirical") {
    if (s.law.catalogue < empirical::kMinCatalogue) {
      throw InvalidArgument("empirical catalogue must be >= " +
                            std::to_string(empirical::kMinCatalogue));
    }
  } else if (s.law.kind == "file") {
    if (s.law.path.empty()) throw InvalidArgument("law.path is required for kind 'file'");
  } else {
    throw InvalidArgument("unknown law kind '" + s.law.kind + "'");
  }
  s.cost.validate();
  if (s.gamma && !(*s.gamma >= 0.0)) throw InvalidArgument("gamma must be >= 0");
  if (!(s.kb_ratio >= 0.0)) throw InvalidArgument("kb_ratio must be >= 0");
  if (s.partitions < 1) throw InvalidArgument("partitions must be >= 1");

  const bool size_analysis = is_one_of(s.analysis, {"hitcurve", "tradeoff"});
  const std::string& var = s.sweep.variable;
  if (s.analysis == "interaid" ? var != "cache_size"
      : size_analysis          ? !is_one_of(var, {"c", "cache_size"})
                               : var != "c") {
    throw InvalidArgument("sweep variable '" + var + "' is not valid for analysis '" +
                          s.analysis + "'");
  }
  if (s.sweep.values.empty()) throw InvalidArgument("sweep grid is empty");
  for (double v : s.sweep.values) {
    if (!std::isfinite(v) || v < 0.0 || (var == "c" && v > 1.0)) {
      throw InvalidArgument("sweep value " + format_double(v) + " out of range for '" +
                            var + "'");
    }
  }
  if (s.simulation.enabled && !is_one_of(s.analysis, {"hitcurve", "interaid"})) {
    throw InvalidArgument("simulation is only available for hitcurve and interaid");
  }
  if (s.simulation.requests < 1) throw InvalidArgument("simulation.requests must be >= 1");
  if (s.simulation.batches < 1) throw InvalidArgument("simulation.batches must be >= 1");
  if (!(s.simulation.warmup_factor >= 0.0)) {
    throw InvalidArgument("simulation.warmup_factor must be >= 0");
  }
  if (s.simulation.sites < 0) throw InvalidArgument("simulation.sites must be >= 0");
  if (s.output.data.empty() || s.output.summary.empty()) {
    throw InvalidArgument("output names must be non-empty");
  }
}

void Table::write_csv(std::ostream& out) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out << (i ? "," : "") << columns[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << format_double(row[i]);
    }
    out << '\n';
  }
}

json Table::to_json() const {
  json rows_json = json::array();
  for (const auto& row : rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size() && i < columns.size(); ++i) {
      obj[columns[i]] = row[i];
    }
    rows_json.push_back(std::move(obj));
  }
  return rows_json;
}

DataFormat parse_format(const std::string& name) {
  if (name == "csv") return DataFormat::kCsv;
  if (name == "json") return DataFormat::kJson;
  throw InvalidArgument("format must be csv or json, got '" + name + "'");
}

std::filesystem::path write_table(const Table& table,
                                  const std::filesystem::path& dir,
                                  const std::string& stem, DataFormat format) {
  std::filesystem::create_directories(dir);
  const auto path = dir / (stem + (format == DataFormat::kCsv ? ".csv" : ".json"));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  if (format == DataFormat::kCsv) {
    table.write_csv(out);
  } else {
    out << table.to_json().dump(2) << '\n';
  }
  return path;
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

std::uint64_t derive_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const InvalidArgument*>(&e)) {
    return 2;
  }
  if (dynamic_cast<const InfeasibleTarget*>(&e) || dynamic_cast<const TruncatedDomain*>(&e) ||
      dynamic_cast<const ScaleLimit*>(&e) || dynamic_cast<const EmptyCatalogue*>(&e)) {
    return 3;
  }
  if (dynamic_cast<const NumericFailure*>(&e)) return 4;
  return 1;
}

RunResult run_scenario(const Scenario& s, const RunOptions& options) {
  validate_scenario(s);
  const std::uint64_t seed = options.seed.value_or(s.seed);
  const PopularityLaw law = build_law(s.law, s.cost.chunk_bytes);
  const double n = static_cast<double>(law.catalogue_size());
  const auto& grid = s.sweep.values;
  const bool normalized_input = s.sweep.variable == "c";
  auto size_of = [&](double v) { return normalized_input ? v * n : v; };
  const double gamma_value = s.gamma ? *s.gamma : gamma(s.cost, law.catalogue_size());

  RunResult result;
  Table& table = result.table;
  json summary = {{"analysis", s.analysis},
                  {"catalogue", law.catalogue_size()},
                  {"seed", seed},
                  {"points", grid.size()}};

  if (s.analysis == "hitcurve") {
    table.columns = {"c", "cache_size", "theta", "t_c"};
    if (s.simulation.enabled) {
      table.columns.insert(table.columns.end(), {"theta_sim", "half_width"});
    }
    table.rows = parallel_map(grid.size(), options.threads, [&](std::size_t i) {
      const double size = std::min(size_of(grid[i]), n);
      const CheSolution sol = solve_characteristic_time(law, size);
      std::vector<double> row{size / n, size, sol.theta, sol.t_c};
      if (s.simulation.enabled) {
        const SimResult sim =
            simulate_lru(law, whole_chunks(size), sim_config(s.simulation, derive_seed(seed, i)));
        row.push_back(sim.theta_local.value);
        row.push_back(sim.theta_local.half_width);
      }
      return row;
    });
  } else if (s.analysis == "tradeoff") {
    table.columns = {"size", "cost_usd_per_month", "theta"};
    table.rows = parallel_map(grid.size(), options.threads, [&](std::size_t i) {
      const double size = size_of(grid[i]);
      return std::vector<double>{size, cost_difference(law, s.cost, size),
                                 overall_hit_rate(law, size)};
    });
  } else if (s.analysis == "normalized") {
    table.columns = {"c", "delta", "theta"};
    auto rows = parallel_map(grid.size(), options.threads, [&](std::size_t i) {
      const double theta = overall_hit_rate(law, grid[i] * n);
      if (theta > s.cost.overall_target + 1e-12) return std::vector<double>{};
      return std::vector<double>{grid[i],
                                 normalized_delta(law, gamma_value, grid[i], s.cost.beta,
                                                  s.cost.overall_target),
                                 theta};
    });
    std::size_t truncated = 0;
    for (auto& row : rows) {
      if (row.empty()) {
        ++truncated;
      } else {
        table.rows.push_back(std::move(row));
      }
    }
    summary["truncated_points"] = truncated;
    if (table.rows.empty()) {
      throw TruncatedDomain("every grid point lies beyond the overall target");
    }
  } else if (s.analysis == "load_sharing") {
    table.columns = {"c", "delta", "delta_ls"};
    table.rows = parallel_map(grid.size(), options.threads, [&](std::size_t i) {
      return std::vector<double>{
          grid[i], normalized_delta(law, gamma_value, grid[i], 1.0, 1.0),
          delta_load_sharing(law, gamma_value, s.kb_ratio, grid[i], s.partitions)};
    });
  } else if (s.analysis == "cooperative") {
    table.columns = {"c", "delta", "delta_cc", "bound", "cache_size", "memory_factor",
                     "theta", "theta_foreign"};
    table.rows = parallel_map(grid.size(), options.threads, [&](std::size_t i) {
      const double c = grid[i];
      const CooperativeDelta cc =
          delta_cooperative(law, gamma_value, s.kb_ratio, c, s.partitions);
      const double factor =
          c > 0.0 ? cc.cache_size / (c * n / s.partitions) : std::nan("");
      return std::vector<double>{c,        normalized_delta(law, gamma_value, c, 1.0, 1.0),
                                 cc.value, cc.bound,
                                 cc.cache_size, factor,
                                 cc.theta, cc.theta_foreign};
    });
  } else {  // interaid
    table.columns = {"cache_size", "overall_capacity", "theta_local", "theta_level1",
                     "theta_foreign"};
    if (s.simulation.enabled) {
      table.columns.insert(table.columns.end(),
                           {"theta_local_sim", "theta_local_hw", "theta_level1_sim",
                            "theta_level1_hw"});
    }
    const int sites = s.simulation.sites > 0 ? s.simulation.sites : s.partitions;
    table.rows = parallel_map(grid.size(), options.threads, [&](std::size_t i) {
      const double size = grid[i];
      const InteraidSolution sol = interaid_hit_rates(law, size, s.partitions);
      std::vector<double> row{size, size * s.partitions, sol.theta_local, sol.theta_level1,
                              sol.theta_foreign};
      if (s.simulation.enabled) {
        const SimResult sim = simulate_interaid(law, whole_chunks(size), s.partitions, sites,
                                                sim_config(s.simulation, derive_seed(seed, i)));
        row.insert(row.end(), {sim.theta_local.value, sim.theta_local.half_width,
                               sim.theta_level1.value, sim.theta_level1.half_width});
      }
      return row;
    });
  }

  if (s.analysis == "tradeoff" || s.analysis == "normalized") {
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
      if (table.rows[i][1] < table.rows[best][1]) best = i;
    }
    const auto& first = table.rows.front();
    const auto& last = table.rows.back();
    summary["argmin"] = {{"size", table.rows[best][0]},
                         {"cost", table.rows[best][1]},
                         {"theta", table.rows[best][2]}};
    summary["endpoints"] = {{"first", {{"size", first[0]}, {"cost", first[1]}}},
                            {"last", {{"size", last[0]}, {"cost", last[1]}}}};
  }
  if (s.analysis != "hitcurve" && s.analysis != "tradeoff" && s.analysis != "interaid") {
    summary["gamma"] = gamma_value;
  }
  summary["scenario"] = to_json(s);

  result.data_path = write_table(table, options.out_dir, s.output.data, options.format);
  result.summary_path = options.out_dir / s.output.summary;
  write_json_file(summary, result.summary_path);
  result.summary = std::move(summary);
  return result;
}

}  // namespace icn
