#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "icn/errors.hpp"
#include "icn/scenario.hpp"

using namespace icn;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("icn_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

json minimal() {
  return json::parse(R"({"analysis": "hitcurve",
                         "law": {"kind": "zipf", "exponent": 0.8, "catalogue": 1000},
                         "sweep": {"c": [0.01, 0.1, 0.5]}})");
}

}  // namespace

TEST_CASE("default scenario round-trips through JSON") {
  const Scenario s = default_scenario();
  CHECK_NOTHROW(validate_scenario(s));
  CHECK(s.sweep.values.size() == 16);
  CHECK(parse_scenario(to_json(s)) == s);
  CHECK(parse_scenario(json::parse(to_json(s).dump())) == s);

  Scenario t = s;
  t.analysis = "cooperative";
  t.gamma = 2.5;
  t.partitions = 10;
  t.kb_ratio = 0.1;
  t.law = {"empirical", 0.8, 1'600'000, ""};
  t.cost.overall_target = 0.9;
  t.simulation.requests = 12345;
  CHECK(parse_scenario(to_json(t)) == t);
}

TEST_CASE("unknown keys and malformed sweeps are rejected") {
  json doc = minimal();
  CHECK_NOTHROW((void)parse_scenario(doc));

  doc["lwa"] = 1;
  CHECK_THROWS_AS((void)parse_scenario(doc), ParseError);
  doc = minimal();
  doc["law"]["exponant"] = 1.0;
  CHECK_THROWS_AS((void)parse_scenario(doc), ParseError);
  doc = minimal();
  doc["cost"] = {{"kb", 15}};
  CHECK_THROWS_AS((void)parse_scenario(doc), ParseError);

  doc = minimal();
  doc["sweep"] = {{"c", {0.1}}, {"cache_size", {10.0}}};
  CHECK_THROWS_AS((void)parse_scenario(doc), ParseError);
  doc["sweep"] = json::object();
  CHECK_THROWS_AS((void)parse_scenario(doc), ParseError);
  doc["sweep"] = {{"c", json::array()}};
  CHECK_THROWS_AS((void)parse_scenario(doc), ParseError);
  doc["sweep"] = {{"c", {{"from", 0.1}, {"to", 0.5}, {"points", 0}}}};
  CHECK_THROWS_AS((void)parse_scenario(doc), ParseError);
  doc["sweep"] = {{"c", {{"from", 0.1}, {"to", 0.5}, {"points", 3}, {"spacing", "cubic"}}}};
  CHECK_THROWS_AS((void)parse_scenario(doc), ParseError);
  doc["sweep"] = {{"beta", {0.5}}};
  CHECK_THROWS_AS((void)parse_scenario(doc), ParseError);

  doc = minimal();
  doc["law"]["exponent"] = "high";
  CHECK_THROWS_AS((void)parse_scenario(doc), ParseError);
  doc = minimal();
  doc["analysis"] = "everything";
  CHECK_THROWS_AS((void)parse_scenario(doc), ParseError);
  doc = minimal();
  doc.erase("sweep");
  CHECK_THROWS_AS((void)parse_scenario(doc), ParseError);
}

TEST_CASE("sweep grids") {
  json doc = minimal();
  doc["sweep"] = {{"c", {{"from", 0.001}, {"to", 1.0}, {"points", 4}, {"spacing", "log"}}}};
  const Scenario s = parse_scenario(doc);
  REQUIRE(s.sweep.values.size() == 4);
  CHECK(s.sweep.values[1] == doctest::Approx(0.01));
  CHECK(s.sweep.values.back() == 1.0);
  const auto lin = make_grid(0.0, 1.0, 5, false);
  CHECK(lin == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(make_grid(2.0, 2.0, 1, true) == std::vector<double>{2.0});
  CHECK_THROWS_AS((void)make_grid(0.0, 1.0, 3, true), InvalidArgument);
}

TEST_CASE("uniform hit curve gives theta = c") {
  json doc = json::parse(R"({"analysis": "hitcurve",
                             "law": {"kind": "zipf", "exponent": 0, "catalogue": 4},
                             "sweep": {"c": [0.25, 0.5, 0.75, 1.0]}})");
  RunOptions opts;
  opts.out_dir = scratch("uniform");
  opts.threads = 2;
  const RunResult r = run_scenario(parse_scenario(doc), opts);
  REQUIRE(r.table.rows.size() == 4);
  for (const auto& row : r.table.rows) CHECK(std::abs(row[2] - row[0]) < 1e-10);
  CHECK(std::filesystem::exists(r.data_path));
  CHECK(std::filesystem::exists(r.summary_path));
  std::filesystem::remove_all(opts.out_dir);
}

TEST_CASE("outputs are byte-identical across thread counts") {
  json doc = minimal();
  doc["simulation"] = {{"enabled", true}, {"requests", 20000}, {"batches", 5}};
  doc["sweep"] = {{"c", {0.01, 0.05, 0.1, 0.3}}};
  const Scenario s = parse_scenario(doc);
  RunOptions one;
  one.out_dir = scratch("t1");
  one.threads = 1;
  RunOptions four = one;
  four.out_dir = scratch("t4");
  four.threads = 4;
  const RunResult a = run_scenario(s, one);
  const RunResult b = run_scenario(s, four);
  CHECK(slurp(a.data_path) == slurp(b.data_path));
  CHECK(slurp(a.summary_path) == slurp(b.summary_path));

  RunOptions reseeded = one;
  reseeded.out_dir = scratch("t7");
  reseeded.seed = 7;
  CHECK(slurp(run_scenario(s, reseeded).data_path) != slurp(a.data_path));
  for (const auto& d : {one.out_dir, four.out_dir, reseeded.out_dir}) {
    std::filesystem::remove_all(d);
  }
}

TEST_CASE("infeasible tradeoff sweep") {
  json doc = minimal();
  doc["analysis"] = "tradeoff";
  doc["cost"] = {{"overall_target", 0.5}};
  doc["sweep"] = {{"c", {0.01, 1.0}}};
  RunOptions opts;
  opts.out_dir = scratch("infeasible");
  try {
    (void)run_scenario(parse_scenario(doc), opts);
    FAIL("expected InfeasibleTarget");
  } catch (const std::exception& e) {
    CHECK(exit_code_for(e) == 3);
  }
  std::filesystem::remove_all(opts.out_dir);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ParseError("x")) == 2);
  CHECK(exit_code_for(InvalidArgument("x")) == 2);
  CHECK(exit_code_for(InfeasibleTarget("x")) == 3);
  CHECK(exit_code_for(TruncatedDomain("x")) == 3);
  CHECK(exit_code_for(ScaleLimit("x")) == 3);
  CHECK(exit_code_for(EmptyCatalogue("x")) == 3);
  CHECK(exit_code_for(NumericFailure("x")) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("parallel map keeps order and propagates errors") {
  for (int threads : {1, 3, 8}) {
    const auto out = parallel_map(100, threads, [](std::size_t i) { return i * i; });
    REQUIRE(out.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) CHECK(out[i] == i * i);
  }
  std::atomic<int> calls{0};
  CHECK_THROWS_AS(parallel_map(20, 4,
                               [&](std::size_t i) {
                                 ++calls;
                                 if (i == 13) throw NumericFailure("boom");
                                 return i;
                               }),
                  NumericFailure);
  CHECK(calls == 20);
  CHECK(parallel_map(0, 4, [](std::size_t i) { return i; }).empty());
}

TEST_CASE("derived seeds") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
}
