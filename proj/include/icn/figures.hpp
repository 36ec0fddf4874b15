#pragma once

// Named figure presets and the experiments behind them. Every figure writes
// one data table plus a JSON summary.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "icn/popularity.hpp"
#include "icn/scenario.hpp"

namespace icn {

struct FigureOptions {
  std::filesystem::path out_dir = ".";
  int threads = 0;
  std::uint64_t seed = 1;
  std::int64_t sim_requests = 10'000'000;
  DataFormat format = DataFormat::kCsv;
};

struct FigureResult {
  std::string name;
  Table table;
  nlohmann::json summary;
  std::filesystem::path data_path;
  std::filesystem::path summary_path;
};

[[nodiscard]] const std::vector<std::string>& figure_names();

/// Computes and writes the named figure. Throws InvalidArgument for an
/// unknown name.
FigureResult reproduce_figure(const std::string& name, const FigureOptions& options);

// Experiments --------------------------------------------------------------

/// 20 log-spaced normalized sizes from 1e-5 to 1.
[[nodiscard]] std::vector<double> convergence_grid();

struct ConvergenceReport {
  std::vector<Rank> catalogues;      ///< last entry is the reference
  std::vector<double> grid;
  std::vector<std::vector<double>> theta;  ///< [catalogue][grid point]
  std::vector<double> max_gap;       ///< vs the reference, per catalogue
};

[[nodiscard]] ConvergenceReport convergence_report(std::vector<Rank> catalogues,
                                                   int threads);

/// Synthetic object catalogue: Zipf(0.8) leecher counts over object rank and
/// sizes drawn log-uniformly in [size_min_bytes, size_max_bytes].
[[nodiscard]] std::vector<ObjectRecord> synthetic_catalogue(
    std::size_t objects, std::int64_t size_min_bytes, std::int64_t size_max_bytes,
    std::uint64_t seed);

struct ImpatienceReport {
  Rank chunks = 0;
  std::vector<double> c_grid;
  std::vector<double> theta_flat;
  std::vector<double> theta_impatient;
  double max_gap = 0.0;
  /// Mean of q_impatient(r)/q_flat(r) over log-spaced body ranks
  /// [M/16000, M/16].
  double body_weight_ratio = 0.0;
  Table weights;  ///< rank, q_flat, q_impatient, ratio
};

[[nodiscard]] ImpatienceReport impatience_report(
    const std::vector<ObjectRecord>& records, double floor,
    std::int64_t size_min_bytes, std::int64_t size_max_bytes, int threads);

struct InteraidCheck {
  Table table;
  double max_gap_local = 0.0;
  double max_gap_level1 = 0.0;
};

/// Simulated vs analytic interaid hit rates for Zipf(alpha), one group of P
/// sites, at the given overall capacities P C.
[[nodiscard]] InteraidCheck interaid_check(double alpha, Rank n, int p,
                                           const std::vector<std::int64_t>& overall,
                                           std::int64_t requests, std::uint64_t seed,
                                           int threads);

/// Overall capacities used by the interaid validation preset.
[[nodiscard]] std::vector<std::int64_t> interaid_validation_capacities();

struct LruCheck {
  Table table;
  double max_gap = 0.0;
};

/// Single-cache simulation vs the Che approximation for Zipf(alpha).
[[nodiscard]] LruCheck lru_check(double alpha, Rank n,
                                 const std::vector<std::int64_t>& sizes,
                                 std::int64_t requests, std::uint64_t seed, int threads);

struct MemoryFactorRow {
  double theta = 0.0;
  int partitions = 1;
  double interaid_size = 0.0;   ///< per-cache size for level-1 rate theta
  double hierarchy_size = 0.0;  ///< C/P with C the plain size for theta
  double factor = 0.0;
};

[[nodiscard]] std::vector<MemoryFactorRow> memory_factors(
    const PopularityLaw& law, const std::vector<double>& thetas,
    const std::vector<int>& partitions, int threads);

}  // namespace icn
