#pragma once

// Scenario configs (JSON, strict keys), sweep execution and tabular output.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "icn/popularity.hpp"
#include "icn/tradeoff.hpp"

namespace icn {

struct LawSpec {
  std::string kind = "zipf";  ///< zipf | empirical | file
  double exponent = 0.8;      ///< zipf only
  Rank catalogue = 10'000;    ///< zipf and empirical
  std::string path;           ///< file only: law CSV or object records
  bool operator==(const LawSpec&) const = default;
};

[[nodiscard]] PopularityLaw build_law(const LawSpec& spec,
                                      std::int64_t chunk_bytes = kDefaultChunkBytes);

/// One sweep variable and its grid, written in JSON either as an explicit
/// list or as {"from", "to", "points", "spacing": "log"|"linear"}.
struct SweepSpec {
  std::string variable = "c";
  std::vector<double> values;
  bool operator==(const SweepSpec&) const = default;
};

[[nodiscard]] std::vector<double> make_grid(double from, double to, int points,
                                            bool log_spacing);

struct SimulationSpec {
  bool enabled = false;
  std::int64_t requests = 1'000'000;
  int batches = 10;
  double warmup_factor = 5.0;
  int sites = 0;  ///< interaid: number of sites (0 means P)
  bool operator==(const SimulationSpec&) const = default;
};

struct OutputSpec {
  std::string data = "result";     ///< file stem; extension from --format
  std::string summary = "summary.json";
  bool operator==(const OutputSpec&) const = default;
};

/// Analyses and the sweep variables they accept:
///   hitcurve      c | cache_size
///   tradeoff      c | cache_size
///   normalized    c
///   load_sharing  c
///   cooperative   c
///   interaid      cache_size (per cache)
struct Scenario {
  std::string analysis = "hitcurve";
  LawSpec law;
  CostParams cost;
  std::optional<double> gamma;  ///< derived from cost and N when absent
  double kb_ratio = 0.0;
  int partitions = 1;
  SweepSpec sweep;
  SimulationSpec simulation;
  OutputSpec output;
  std::uint64_t seed = 1;
  bool operator==(const Scenario&) const = default;
};

[[nodiscard]] Scenario default_scenario();

/// Throws ParseError on unknown keys, wrong types or failed validation.
[[nodiscard]] Scenario parse_scenario(const nlohmann::json& doc);
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);
[[nodiscard]] nlohmann::json to_json(const Scenario& scenario);

void validate_scenario(const Scenario& scenario);

/// Rows of doubles under named columns.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void write_csv(std::ostream& out) const;
  [[nodiscard]] nlohmann::json to_json() const;
};

enum class DataFormat { kCsv, kJson };

[[nodiscard]] DataFormat parse_format(const std::string& name);

/// Writes `table` to dir/stem.csv or dir/stem.json; returns the path.
std::filesystem::path write_table(const Table& table,
                                  const std::filesystem::path& dir,
                                  const std::string& stem, DataFormat format);

void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  int threads = 0;  ///< 0 means hardware concurrency
  DataFormat format = DataFormat::kCsv;
  std::optional<std::uint64_t> seed;
};

struct RunResult {
  Table table;
  nlohmann::json summary;
  std::filesystem::path data_path;
  std::filesystem::path summary_path;
};

[[nodiscard]] RunResult run_scenario(const Scenario& scenario,
                                     const RunOptions& options);

/// 2 parse/validation, 3 infeasible scenario, 4 numeric failure, 1 other.
[[nodiscard]] int exit_code_for(const std::exception& e);

[[nodiscard]] int resolve_threads(int requested);

/// Seed for grid point `index`, independent of how points are scheduled.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::size_t index);

/// fn(i) for i in [0, count) on up to `threads` workers; results in index
/// order. The first exception thrown by any call is rethrown.
template <class Fn>
auto parallel_map(std::size_t count, int threads, const Fn& fn)
    -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<std::size_t>(
      std::max(1, std::min(resolve_threads(threads), static_cast<int>(count))));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  std::vector<R> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

}  // namespace icn
