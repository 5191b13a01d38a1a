#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "crembo/csv_format.hpp"
#include "crembo/error.hpp"
#include "crembo/experiment.hpp"

using namespace crembo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("crembo_test_experiment_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string error_message(const std::string& text) {
  try {
    parse_experiment_spec(text, "spec.json");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
    return e.message();
  }
  FAIL("expected InvalidConfig");
  return {};
}

constexpr const char* kTinySpec = R"({
  "defaults": {"budget": 5, "n_init": 3, "surrogate": {"restarts": 1, "max_evaluations": 40},
               "acquisition": {"candidate_pool": 64, "restarts": 2}},
  "runs": [
    {"method": "rembo", "benchmark": "sphere_d2_D10", "seeds": [1, 2]}
  ]
})";

}  // namespace

TEST_CASE("format_double") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-313.329325630171) == "-313.32932563");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(1e-20) == "1e-20");
}

TEST_CASE("spec parsing") {
  SUBCASE("defaults, seeds and labels expand into runs") {
    const auto spec = parse_experiment_spec(R"({
      "output_dir": "out",
      "defaults": {"budget": 20, "n_init": 5},
      "runs": [
        {"method": "crembo", "benchmark": "styblinski_tang_d8_D21", "seeds": {"start": 10, "count": 3}},
        {"method": "sa_crembo", "K": 4, "label": "sa4", "benchmark": "hartmann6_D21", "seeds": 2}
      ]})", "spec.json", 100);
    REQUIRE(spec.runs.size() == 5);
    CHECK(spec.output_dir == "out");
    CHECK(spec.runs[0].label == "crembo");
    CHECK(spec.runs[0].config.seed == 110);
    CHECK(spec.runs[0].config.d == 8);
    CHECK(spec.runs[0].config.big_d == 21);
    CHECK(spec.runs[3].label == "sa4");
    CHECK(spec.runs[3].config.k_embeddings == 4);
    CHECK(spec.runs[3].config.d == 6);
    CHECK(spec.runs[4].config.budget == 20);
  }
  SUBCASE("syntax errors report line and column") {
    const auto msg = error_message("{\n  \"runs\": [\n    {\"method\": rembo}\n  ]\n}");
    CHECK(msg.rfind("spec.json:3:", 0) == 0);
  }
  SUBCASE("semantic errors point at the offending run entry") {
    const auto msg = error_message(R"({
  "runs": [
    {"method": "rembo", "benchmark": "sphere_d2_D10"},
    {"method": "rembo", "benchmark": "sphere_d2_D10", "budget": 1}
  ]
})");
    CHECK(msg.rfind("spec.json:4:5:", 0) == 0);
    CHECK(msg.find("runs[1]") != std::string::npos);
  }
  SUBCASE("other rejections") {
    CHECK(error_message(R"({"runs": []})").find("spec.json:1:1:") == 0);
    CHECK(error_message(R"({"runs": [{"benchmark": "sphere_d2_D10"}], "extra": 1})").find("extra") !=
          std::string::npos);
    CHECK(error_message(R"({"runs": [{"benchmark": "nope_d2_D10"}]})").find("nope") != std::string::npos);
    CHECK(error_message(R"({"runs": [{"benchmark": "sphere_d2_D10", "D": 11}]})").find("disagrees") !=
          std::string::npos);
    CHECK(error_message(R"({"runs": [{"benchmark": "sphere_d2_D10", "seeds": [1, 1]}]})").find("duplicate") !=
          std::string::npos);
    CHECK(error_message(R"({"runs": [{"benchmark": "sphere_d2_D10", "colour": "red"}]})").find("colour") !=
          std::string::npos);
  }
}

TEST_CASE("running a spec writes traces and histories deterministically") {
  const auto spec = parse_experiment_spec(kTinySpec, "tiny.json");
  const auto a = scratch("run_a");
  const auto b = scratch("run_b");
  const auto outcome = run_experiment(spec, a, 2);
  CHECK(outcome.completed == 2);
  CHECK(outcome.failures.empty());
  run_experiment(spec, b, 1);

  const auto table = read_csv(a / "trace.csv");
  CHECK(table.header ==
        std::vector<std::string>{"method", "benchmark", "seed", "eval_index", "z", "value", "best_so_far"});
  CHECK(table.rows.size() == 10);
  CHECK(table.rows[0][table.column("eval_index")] == "1");
  CHECK(table.rows[5][table.column("seed")] == "2");
  CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));

  const auto history = slurp(a / "runs" / "rembo_sphere_d2_D10_seed1.jsonl");
  std::istringstream lines(history);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("record") == (count == 0 ? "config" : "observation"));
    ++count;
  }
  CHECK(count == 6);
}

TEST_CASE("summarize computes medians and IQRs per evaluation index") {
  const auto dir = scratch("summarize");
  write_file(dir / "trace.csv",
             "method,benchmark,seed,eval_index,z,value,best_so_far\n"
             "m,b,1,1,1,5,5\n"
             "m,b,2,1,2,3,3\n"
             "m,b,3,1,1,1,1\n"
             "m,b,4,1,1,7,7\n"
             "m,b,1,2,1,4,4\n"
             "m,b,2,2,2,9,3\n"
             "m,b,3,2,1,2,1\n"
             "m,b,4,2,2,0,0\n");
  summarize_trace(dir / "trace.csv", dir);
  const auto summary = read_csv(dir / "summary.csv");
  REQUIRE(summary.rows.size() == 2);
  // best_so_far at eval 1: {1, 3, 5, 7}; at eval 2: {0, 1, 3, 4}.
  CHECK(summary.rows[0] == std::vector<std::string>{"m", "b", "1", "4", "4", "2.5", "5.5", "3"});
  CHECK(summary.rows[1] == std::vector<std::string>{"m", "b", "2", "4", "2", "0.75", "3.25", "2.5"});

  const auto hist = read_csv(dir / "z_hist.csv");
  CHECK(hist.header == std::vector<std::string>{"method", "benchmark", "seed", "z", "count"});
  CHECK(hist.rows.size() == 5);
  CHECK(hist.rows[0] == std::vector<std::string>{"m", "b", "1", "1", "2"});
}

TEST_CASE("summarize rejects malformed traces") {
  const auto dir = scratch("bad_trace");
  write_file(dir / "empty.csv", "");
  try {
    summarize_trace(dir / "empty.csv", dir);
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaError);
  }
  write_file(dir / "missing.csv", "method,benchmark,seed\nm,b,1\n");
  CHECK_THROWS_AS(summarize_trace(dir / "missing.csv", dir), Error);
  write_file(dir / "ragged.csv", "method,benchmark,seed,eval_index,z,value,best_so_far\nm,b,1\n");
  CHECK_THROWS_AS(summarize_trace(dir / "ragged.csv", dir), Error);

  std::ostringstream out, err;
  CHECK(cmd_summarize(dir / "empty.csv", dir, out, err) == 2);
  CHECK(err.str().find("error") != std::string::npos);
}

TEST_CASE("command exit codes") {
  const auto dir = scratch("commands");
  std::ostringstream out, err;
  CHECK(cmd_verify_rank(21, 8, 6, 50, 0, dir, out, err) == 0);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(cmd_verify_rank(5, 8, 6, 10, 0, dir, out, err) == 2);
  CHECK(cmd_verify_recovery("sphere_d4_D50", 0, 5, 1, 1e-6, dir, out, err) == 0);
  CHECK(cmd_verify_recovery("sphere_d4_D50", 0, 5, 1, -1.0, dir, out, err) == 1);
  CHECK(cmd_verify_recovery("unknown", 0, 5, 1, 1e-6, dir, out, err) == 2);

  write_file(dir / "bad.json", "{\"runs\": [}");
  CHECK(cmd_run(dir / "bad.json", dir / "out", 0, out, err) == 2);
  CHECK(cmd_run(dir / "absent.json", dir / "out", 0, out, err) == 2);
  write_file(dir / "tiny.json", kTinySpec);
  CHECK(cmd_run(dir / "tiny.json", dir / "out", 0, out, err) == 0);
  CHECK(fs::exists(dir / "out" / "trace.csv"));
}
