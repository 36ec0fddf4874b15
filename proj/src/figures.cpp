#include "icn/figures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>

#include "icn/che.hpp"
#include "icn/errors.hpp"
#include "icn/records_io.hpp"
#include "icn/simulator.hpp"
#include "icn/tradeoff.hpp"

namespace icn {
namespace {

using nlohmann::json;

constexpr Rank kNominalCatalogue = 1'600'000'000;
constexpr double kImpatienceFloor = 0.3;
constexpr std::int64_t kMegabyte = 1'000'000;

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Distinct integer ranks, roughly log-spaced over [1, n].
std::vector<Rank> log_ranks(Rank lo, Rank hi, int points) {
  std::vector<Rank> out;
  const double a = std::log(static_cast<double>(lo));
  const double b = std::log(static_cast<double>(hi));
  for (int i = 0; i < points; ++i) {
    const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    const auto r = std::clamp<Rank>(static_cast<Rank>(std::llround(std::exp(a + (b - a) * f))),
                                    lo, hi);
    if (out.empty() || r > out.back()) out.push_back(r);
  }
  return out;
}

FigureResult finish(const std::string& name, Table table, json summary,
                    const FigureOptions& options) {
  FigureResult out;
  out.name = name;
  summary["figure"] = name;
  out.data_path = write_table(table, options.out_dir, name, options.format);
  out.summary_path = options.out_dir / (name + ".json");
  write_json_file(summary, out.summary_path);
  out.table = std::move(table);
  out.summary = std::move(summary);
  return out;
}

double bytes_of(double chunks) { return chunks * static_cast<double>(kDefaultChunkBytes); }

// ---------------------------------------------------------------------------

FigureResult figure_popularity(const FigureOptions& options) {
  const PopularityLaw law = build_empirical(kNominalCatalogue);
  Table table{{"rank", "q", "segment"}, {}};
  for (Rank r : log_ranks(1, law.catalogue_size(), 241)) {
    table.rows.push_back({static_cast<double>(r), law.popularity(r),
                          static_cast<double>(law.segment_of(r))});
  }
  json summary = law_metadata(law);
  json segments = json::array();
  for (const Segment& s : law.segments()) {
    segments.push_back({{"rank_lo", s.rank_lo}, {"rank_hi", s.rank_hi},
                        {"amplitude", s.amplitude}, {"exponent", s.exponent}});
  }
  summary["law"] = segments;
  return finish("popularity", std::move(table), std::move(summary), options);
}

FigureResult figure_hitcurve(const FigureOptions& options) {
  const auto pieces = empirical_pieces(kNominalCatalogue);
  const EmpiricalBreakpoints bp = empirical_breakpoints(kNominalCatalogue);
  std::vector<ChainPiece> body_tail;
  for (std::size_t i = 1; i < pieces.size(); ++i) {
    ChainPiece p = pieces[i];
    p.rank_hi -= bp.head_end;
    if (i == 1) p.junction = 1.0;
    body_tail.push_back(p);
  }
  const std::vector<std::pair<std::string, PopularityLaw>> laws = {
      {"real", build_chained(pieces)},
      {"head_body", build_chained(std::vector<ChainPiece>{pieces[0], pieces[1]})},
      {"body", build_zipf(empirical::kBodyExponent, bp.body_end - bp.head_end)},
      {"body_tail", build_chained(body_tail)},
      {"head_zipf1.2",
       build_chained(std::vector<ChainPiece>{
           pieces[0], {kNominalCatalogue, 1.2, empirical::kHeadBodyJunction}})},
  };
  const std::vector<double> sizes =
      make_grid(100.0, static_cast<double>(kNominalCatalogue), 57, true);

  Table table;
  table.columns = {"cache_size", "cache_bytes"};
  for (const auto& [name, law] : laws) table.columns.push_back("theta_" + name);
  table.rows = parallel_map(sizes.size(), options.threads, [&](std::size_t i) {
    std::vector<double> row{sizes[i], bytes_of(sizes[i])};
    for (const auto& entry : laws) {
      const PopularityLaw& law = entry.second;
      row.push_back(overall_hit_rate(
          law, std::min(sizes[i], static_cast<double>(law.catalogue_size()))));
    }
    return row;
  });
  json summary;
  for (const auto& [name, law] : laws) {
    summary["laws"][name] = {{"catalogue", law.catalogue_size()},
                             {"theta_at_1e8_chunks",
                              overall_hit_rate(law, std::min(1e8, static_cast<double>(
                                                                     law.catalogue_size())))}};
  }
  return finish("hitcurve", std::move(table), std::move(summary), options);
}

FigureResult figure_convergence(const FigureOptions& options) {
  const ConvergenceReport rep = convergence_report(
      {160'000, 1'600'000, 160'000'000, kNominalCatalogue}, options.threads);
  Table table;
  table.columns = {"c"};
  for (Rank n : rep.catalogues) table.columns.push_back("theta_N" + label(static_cast<double>(n)));
  for (std::size_t j = 0; j < rep.grid.size(); ++j) {
    std::vector<double> row{rep.grid[j]};
    for (const auto& curve : rep.theta) row.push_back(curve[j]);
    table.rows.push_back(std::move(row));
  }
  json gaps = json::object();
  for (std::size_t k = 0; k + 1 < rep.catalogues.size(); ++k) {
    gaps[label(static_cast<double>(rep.catalogues[k]))] = rep.max_gap[k];
  }
  json summary{{"reference_catalogue", rep.catalogues.back()}, {"max_gap", gaps}};
  return finish("convergence", std::move(table), std::move(summary), options);
}

FigureResult figure_impatience(const FigureOptions& options) {
  const auto records = synthetic_catalogue(100'000, 10 * kMegabyte, 100 * kMegabyte,
                                           options.seed);
  const ImpatienceReport rep = impatience_report(records, kImpatienceFloor, 10 * kMegabyte,
                                                 1000 * kMegabyte, options.threads);
  json hit = json::array();
  for (std::size_t i = 0; i < rep.c_grid.size(); ++i) {
    hit.push_back({{"c", rep.c_grid[i]},
                   {"theta_flat", rep.theta_flat[i]},
                   {"theta_impatient", rep.theta_impatient[i]}});
  }
  json summary{{"objects", records.size()},
               {"chunks", rep.chunks},
               {"floor", kImpatienceFloor},
               {"max_hit_rate_gap", rep.max_gap},
               {"body_weight_ratio", rep.body_weight_ratio},
               {"hit_rates", hit}};
  return finish("impatience", rep.weights, std::move(summary), options);
}

FigureResult figure_deltacost(const FigureOptions& options) {
  const PopularityLaw law = build_empirical(kNominalCatalogue);
  const CostParams nominal = CostParams::nominal();
  CostParams up = nominal;
  up.k_b *= 10.0;
  CostParams down = nominal;
  down.k_b /= 10.0;
  const std::vector<std::pair<std::string, CostParams>> curves = {
      {"nominal", nominal}, {"kb_x10", up}, {"kb_div10", down}};

  const double n = static_cast<double>(kNominalCatalogue);
  std::vector<double> sizes{0.0};
  for (double s : make_grid(n * 1e-6, n, 49, true)) sizes.push_back(s);

  Table table;
  table.columns = {"cache_size", "cache_bytes", "theta"};
  for (const auto& c : curves) table.columns.push_back("cost_" + c.first);
  table.rows = parallel_map(sizes.size(), options.threads, [&](std::size_t i) {
    std::vector<double> row{sizes[i], bytes_of(sizes[i]), overall_hit_rate(law, sizes[i])};
    for (const auto& c : curves) row.push_back(cost_difference(law, c.second, sizes[i]));
    return row;
  });

  const auto optima = parallel_map(curves.size(), options.threads, [&](std::size_t i) {
    return optimize_cache_size(law, curves[i].second);
  });
  json summary;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const CacheOptimum& o = optima[i];
    summary["curves"][curves[i].first] = {
        {"cost_at_zero", table.rows.front()[3 + i]},
        {"cost_at_catalogue", table.rows.back()[3 + i]},
        {"optimum",
         {{"cache_size", o.cache_size},
          {"cache_bytes", bytes_of(o.cache_size)},
          {"cost", o.cost},
          {"theta", o.theta},
          {"interior", o.interior},
          {"kind", to_string(o.kind)}}}};
  }
  summary["gamma_nominal"] = gamma(nominal, kNominalCatalogue);
  return finish("deltacost", std::move(table), std::move(summary), options);
}

FigureResult figure_delta_norm(const std::string& name, double overall_target,
                               double beta, const FigureOptions& options) {
  const PopularityLaw law = build_empirical(kNominalCatalogue);
  const double n = static_cast<double>(kNominalCatalogue);
  const std::vector<double> gammas{0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> cs{0.0};
  for (double c : make_grid(1e-5, 1.0, 51, true)) cs.push_back(c);

  const auto thetas = parallel_map(cs.size(), options.threads, [&](std::size_t i) {
    return overall_hit_rate(law, cs[i] * n);
  });
  Table table;
  table.columns = {"c", "theta"};
  for (double g : gammas) table.columns.push_back("delta_gamma" + label(g));
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (thetas[i] > overall_target + 1e-12) continue;
    std::vector<double> row{cs[i], thetas[i]};
    for (double g : gammas) row.push_back(g * std::pow(1.0 - thetas[i], beta) + cs[i]);
    table.rows.push_back(std::move(row));
  }
  json summary{{"overall_target", overall_target},
               {"beta", beta},
               {"points", table.rows.size()},
               {"c_max", overall_target < 1.0 ? cache_size_for_hit(law, overall_target) / n
                                              : 1.0}};
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
      if (table.rows[i][2 + k] < table.rows[best][2 + k]) best = i;
    }
    summary["argmin"][label(gammas[k])] = {{"c", table.rows[best][0]},
                                           {"theta", table.rows[best][1]},
                                           {"delta", table.rows[best][2 + k]}};
  }
  for (double th : {0.5, 0.7, 0.9, 0.99}) {
    summary["hit_rate_marks"][label(th)] = cache_size_for_hit(law, th) / n;
  }
  return finish(name, std::move(table), std::move(summary), options);
}

FigureResult figure_coop_validate(const FigureOptions& options) {
  const InteraidCheck chk = interaid_check(0.8, 10'000, 10, interaid_validation_capacities(),
                                           options.sim_requests, options.seed, options.threads);
  json summary{{"catalogue", 10'000},
               {"exponent", 0.8},
               {"partitions", 10},
               {"requests", options.sim_requests},
               {"max_gap_local", chk.max_gap_local},
               {"max_gap_level1", chk.max_gap_level1}};
  return finish("coop-validate", chk.table, std::move(summary), options);
}

FigureResult figure_coop_capacity(const std::string& name, bool overall,
                                  const FigureOptions& options) {
  const PopularityLaw law = build_empirical(kNominalCatalogue);
  const std::vector<int> ps{1, 5, 10, 20};
  const std::vector<double> xs = make_grid(1e5, 1e9, 17, true);
  Table table;
  table.columns = {overall ? "overall_capacity" : "cache_size", "bytes"};
  for (int p : ps) {
    table.columns.push_back("theta_local_P" + std::to_string(p));
    table.columns.push_back("theta_level1_P" + std::to_string(p));
  }
  const auto cells = parallel_map(xs.size() * ps.size(), options.threads, [&](std::size_t k) {
    const double x = xs[k / ps.size()];
    const int p = ps[k % ps.size()];
    return interaid_hit_rates(law, overall ? x / p : x, p);
  });
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::vector<double> row{xs[i], bytes_of(xs[i])};
    for (std::size_t j = 0; j < ps.size(); ++j) {
      const InteraidSolution& s = cells[i * ps.size() + j];
      row.push_back(s.theta_local);
      row.push_back(s.theta_level1);
    }
    table.rows.push_back(std::move(row));
  }
  json summary{{"partitions", ps}, {"axis", overall ? "overall capacity P C" : "local C"}};
  if (!overall) {
    double spread = 0.0;
    for (const auto& row : table.rows) {
      for (std::size_t j = 1; j < ps.size(); ++j) {
        spread = std::max(spread, std::abs(row[2 + 2 * j] - row[2]));
      }
    }
    summary["max_local_spread_vs_P1"] = spread;
  } else {
    const auto rows = memory_factors(law, {0.5, 0.6, 0.7, 0.8, 0.9}, {5, 10, 20},
                                     options.threads);
    json factors = json::array();
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const MemoryFactorRow& r : rows) {
      factors.push_back({{"theta", r.theta},
                         {"P", r.partitions},
                         {"interaid_size", r.interaid_size},
                         {"hierarchy_size", r.hierarchy_size},
                         {"factor", r.factor}});
      lo = std::min(lo, r.factor);
      hi = std::max(hi, r.factor);
    }
    summary["memory_factor"] = {{"rows", factors}, {"min", lo}, {"max", hi}};
  }
  return finish(name, std::move(table), std::move(summary), options);
}

}  // namespace

const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names = {
      "popularity",     "hitcurve",      "convergence", "impatience",
      "deltacost",      "delta-norm",    "delta-norm-90", "delta-norm-scale",
      "coop-validate",  "coop-local",    "coop-overall"};
  return names;
}

FigureResult reproduce_figure(const std::string& name, const FigureOptions& options) {
  if (name == "popularity") return figure_popularity(options);
  if (name == "hitcurve") return figure_hitcurve(options);
  if (name == "convergence") return figure_convergence(options);
  if (name == "impatience") return figure_impatience(options);
  if (name == "deltacost") return figure_deltacost(options);
  if (name == "delta-norm") return figure_delta_norm(name, 1.0, 1.0, options);
  if (name == "delta-norm-90") return figure_delta_norm(name, 0.9, 1.0, options);
  if (name == "delta-norm-scale") return figure_delta_norm(name, 1.0, 0.75, options);
  if (name == "coop-validate") return figure_coop_validate(options);
  if (name == "coop-local") return figure_coop_capacity(name, false, options);
  if (name == "coop-overall") return figure_coop_capacity(name, true, options);
  throw InvalidArgument("unknown figure '" + name + "'");
}

std::vector<double> convergence_grid() { return make_grid(1e-5, 1.0, 20, true); }

ConvergenceReport convergence_report(std::vector<Rank> catalogues, int threads) {
  if (catalogues.empty()) throw InvalidArgument("convergence needs catalogues");
  ConvergenceReport rep;
  rep.catalogues = std::move(catalogues);
  rep.grid = convergence_grid();
  const std::size_t m = rep.grid.size();
  for (Rank n : rep.catalogues) {
    const PopularityLaw law = build_empirical(n);
    rep.theta.push_back(parallel_map(m, threads, [&](std::size_t j) {
      return overall_hit_rate(law, rep.grid[j] * static_cast<double>(n));
    }));
  }
  const auto& ref = rep.theta.back();
  for (const auto& curve : rep.theta) {
    double gap = 0.0;
    for (std::size_t j = 0; j < m; ++j) gap = std::max(gap, std::abs(curve[j] - ref[j]));
    rep.max_gap.push_back(gap);
  }
  return rep;
}

std::vector<ObjectRecord> synthetic_catalogue(std::size_t objects,
                                              std::int64_t size_min_bytes,
                                              std::int64_t size_max_bytes,
                                              std::uint64_t seed) {
  if (objects == 0) throw InvalidArgument("synthetic catalogue needs objects");
  if (size_min_bytes < 1 || size_min_bytes > size_max_bytes) {
    throw InvalidArgument("invalid synthetic size range");
  }
  std::mt19937_64 rng(seed);
  const double a = std::log(static_cast<double>(size_min_bytes));
  const double b = std::log(static_cast<double>(size_max_bytes));
  std::vector<ObjectRecord> out;
  out.reserve(objects);
  for (std::size_t i = 0; i < objects; ++i) {
    ObjectRecord r;
    r.object_id = "obj" + std::to_string(i + 1);
    r.leechers = 1e6 * std::pow(static_cast<double>(i + 1), -0.8);
    r.size_bytes = std::clamp<std::int64_t>(
        std::llround(std::exp(a + (b - a) * uniform01(rng))), size_min_bytes, size_max_bytes);
    out.push_back(std::move(r));
  }
  return out;
}

ImpatienceReport impatience_report(const std::vector<ObjectRecord>& records, double floor,
                                   std::int64_t size_min_bytes, std::int64_t size_max_bytes,
                                   int threads) {
  const PopularityLaw flat = apply_impatience(records, 1.0, size_min_bytes, size_max_bytes);
  const PopularityLaw impatient =
      apply_impatience(records, floor, size_min_bytes, size_max_bytes);
  ImpatienceReport rep;
  rep.chunks = flat.catalogue_size();
  const double m = static_cast<double>(rep.chunks);
  rep.c_grid = make_grid(1e-4, 1.0, 20, true);
  const auto pairs = parallel_map(rep.c_grid.size(), threads, [&](std::size_t i) {
    return std::pair{overall_hit_rate(flat, rep.c_grid[i] * m),
                     overall_hit_rate(impatient, rep.c_grid[i] * m)};
  });
  for (const auto& [f, im] : pairs) {
    rep.theta_flat.push_back(f);
    rep.theta_impatient.push_back(im);
    rep.max_gap = std::max(rep.max_gap, std::abs(f - im));
  }

  const Rank body_lo = std::max<Rank>(1, rep.chunks / empirical::kHeadRankDivisor);
  const Rank body_hi = std::max<Rank>(body_lo, rep.chunks / empirical::kBodyRankDivisor);
  const auto body = log_ranks(body_lo, body_hi, 50);
  double sum = 0.0;
  for (Rank r : body) sum += impatient.popularity(r) / flat.popularity(r);
  rep.body_weight_ratio = sum / static_cast<double>(body.size());

  rep.weights.columns = {"rank", "q_flat", "q_impatient", "ratio"};
  for (Rank r : log_ranks(1, rep.chunks, 200)) {
    const double qf = flat.popularity(r);
    const double qi = impatient.popularity(r);
    rep.weights.rows.push_back({static_cast<double>(r), qf, qi, qi / qf});
  }
  return rep;
}

std::vector<std::int64_t> interaid_validation_capacities() {
  return {20, 50, 100, 200, 500, 1000, 2000, 5000};
}

InteraidCheck interaid_check(double alpha, Rank n, int p,
                             const std::vector<std::int64_t>& overall,
                             std::int64_t requests, std::uint64_t seed, int threads) {
  const PopularityLaw law = build_zipf(alpha, n);
  InteraidCheck chk;
  chk.table.columns = {"overall_capacity", "cache_size", "theta_local", "theta_level1",
                       "theta_local_sim", "theta_local_hw", "theta_level1_sim",
                       "theta_level1_hw"};
  chk.table.rows = parallel_map(overall.size(), threads, [&](std::size_t i) {
    const std::int64_t c = overall[i] / p;
    const InteraidSolution sol = interaid_hit_rates(law, static_cast<double>(c), p);
    SimConfig cfg;
    cfg.requests = requests;
    cfg.seed = derive_seed(seed, i);
    const SimResult sim = simulate_interaid(law, c, p, p, cfg);
    return std::vector<double>{static_cast<double>(c * p), static_cast<double>(c),
                               sol.theta_local, sol.theta_level1,
                               sim.theta_local.value, sim.theta_local.half_width,
                               sim.theta_level1.value, sim.theta_level1.half_width};
  });
  for (const auto& row : chk.table.rows) {
    chk.max_gap_local = std::max(chk.max_gap_local, std::abs(row[4] - row[2]));
    chk.max_gap_level1 = std::max(chk.max_gap_level1, std::abs(row[6] - row[3]));
  }
  return chk;
}

LruCheck lru_check(double alpha, Rank n, const std::vector<std::int64_t>& sizes,
                   std::int64_t requests, std::uint64_t seed, int threads) {
  const PopularityLaw law = build_zipf(alpha, n);
  LruCheck chk;
  chk.table.columns = {"cache_size", "theta", "theta_sim", "half_width", "gap"};
  chk.table.rows = parallel_map(sizes.size(), threads, [&](std::size_t i) {
    const double theta = overall_hit_rate(law, static_cast<double>(sizes[i]));
    SimConfig cfg;
    cfg.requests = requests;
    cfg.seed = derive_seed(seed, i);
    const SimResult sim = simulate_lru(law, sizes[i], cfg);
    return std::vector<double>{static_cast<double>(sizes[i]), theta, sim.theta_local.value,
                               sim.theta_local.half_width,
                               std::abs(sim.theta_local.value - theta)};
  });
  for (const auto& row : chk.table.rows) chk.max_gap = std::max(chk.max_gap, row[4]);
  return chk;
}

std::vector<MemoryFactorRow> memory_factors(const PopularityLaw& law,
                                            const std::vector<double>& thetas,
                                            const std::vector<int>& partitions,
                                            int threads) {
  const std::size_t count = thetas.size() * partitions.size();
  return parallel_map(count, threads, [&](std::size_t k) {
    MemoryFactorRow r;
    r.theta = thetas[k / partitions.size()];
    r.partitions = partitions[k % partitions.size()];
    r.interaid_size = interaid_size_for_hit(law, r.theta, r.partitions);
    r.hierarchy_size = cache_size_for_hit(law, r.theta) / r.partitions;
    r.factor = r.interaid_size / r.hierarchy_size;
    return r;
  });
}

}  // namespace icn
