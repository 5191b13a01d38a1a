#include "crembo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "crembo/benchmarks.hpp"
#include "crembo/csv_format.hpp"
#include "crembo/error.hpp"
#include "crembo/verification.hpp"

namespace crembo {

namespace fs = std::filesystem;

namespace {

struct TextPosition {
  int line = 1;
  int column = 1;
};

TextPosition position_of(std::string_view text, std::size_t offset) {
  TextPosition p;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

// Byte offsets of the elements of the top-level "runs" array. The text is
// already known to be valid JSON.
std::vector<std::size_t> locate_run_entries(std::string_view text) {
  std::vector<std::size_t> starts;
  int depth = 0;
  int runs_depth = -1;
  std::string last_key;
  bool expect_value = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '"') {
      std::string s;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\') ++i;
        else s.push_back(text[i]);
      }
      if (depth == 1) last_key = s;
      if (runs_depth == depth && expect_value) starts.push_back(i - s.size() - 1);
      expect_value = false;
      continue;
    }
    if (c == '{' || c == '[') {
      if (runs_depth == depth && expect_value) starts.push_back(i);
      ++depth;
      if (c == '[' && depth == 2 && last_key == "runs") {
        runs_depth = 2;
        expect_value = true;
      } else {
        expect_value = false;
      }
      continue;
    }
    if (c == '}' || c == ']') {
      if (depth == runs_depth) runs_depth = -1;
      --depth;
      continue;
    }
    if (c == ',' && depth == runs_depth) {
      expect_value = true;
      continue;
    }
    if (!std::isspace(static_cast<unsigned char>(c)) && runs_depth == depth && expect_value) {
      starts.push_back(i);
      expect_value = false;
    }
  }
  return starts;
}

[[noreturn]] void config_error(std::string_view source, TextPosition p, const std::string& message) {
  throw Error(ErrorCode::InvalidConfig,
              std::string(source) + ":" + std::to_string(p.line) + ":" + std::to_string(p.column) + ": " + message);
}

std::vector<std::uint64_t> parse_seeds(const nlohmann::json& j, int replications) {
  std::vector<std::uint64_t> seeds;
  if (!j.contains("seeds")) {
    for (int i = 0; i < replications; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
    return seeds;
  }
  const auto& s = j.at("seeds");
  if (s.is_array()) {
    for (const auto& v : s) seeds.push_back(v.get<std::uint64_t>());
  } else if (s.is_number_integer()) {
    const auto n = s.get<std::int64_t>();
    for (std::int64_t i = 0; i < n; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
  } else if (s.is_object()) {
    const auto start = s.at("start").get<std::uint64_t>();
    const auto count = s.at("count").get<std::int64_t>();
    for (std::int64_t i = 0; i < count; ++i) seeds.push_back(start + static_cast<std::uint64_t>(i));
  } else {
    throw Error(ErrorCode::InvalidConfig, "'seeds' must be a list, a count, or {start, count}");
  }
  if (seeds.empty()) throw Error(ErrorCode::InvalidConfig, "'seeds' selects no runs");
  return seeds;
}

std::string run_file_name(const ExperimentRun& r) {
  return r.label + "_" + r.config.benchmark + "_seed" + std::to_string(r.config.seed) + ".jsonl";
}

void write_history(const fs::path& path, const ExperimentRun& run, const RunResult& result) {
  std::ofstream out(path);
  out << nlohmann::json{{"record", "config"}, {"label", run.label}, {"config", to_json(result.config)}}.dump() << '\n';
  for (const auto& o : result.history) {
    auto j = to_json(o);
    j["record"] = "observation";
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
}

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

long parse_long(const std::string& s, const char* column) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::SchemaError, std::string("non-integer ") + column + " '" + s + "'");
  }
}

double parse_double(const std::string& s, const char* column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::SchemaError, std::string("non-numeric ") + column + " '" + s + "'");
  }
}

}  // namespace

ExperimentSpec parse_experiment_spec(std::string_view text, std::string_view source_name, std::uint64_t seed_offset) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& ex) {
    const std::size_t offset = ex.byte > 0 ? ex.byte - 1 : 0;
    config_error(source_name, position_of(text, offset), ex.what());
  }

  ExperimentSpec spec;
  const TextPosition top{1, 1};
  if (!root.is_object() || !root.contains("runs") || !root.at("runs").is_array() || root.at("runs").empty()) {
    config_error(source_name, top, "spec must be an object with a non-empty 'runs' array");
  }
  for (const auto& item : root.items()) {
    if (item.key() != "runs" && item.key() != "defaults" && item.key() != "output_dir" &&
        item.key() != "replications") {
      config_error(source_name, top, "unknown top-level key '" + item.key() + "'");
    }
  }
  try {
    if (root.contains("output_dir")) spec.output_dir = root.at("output_dir").get<std::string>();
    if (root.contains("replications")) spec.replications = root.at("replications").get<int>();
  } catch (const nlohmann::json::exception& ex) {
    config_error(source_name, top, ex.what());
  }
  if (spec.replications < 1) config_error(source_name, top, "'replications' must be >= 1");
  const nlohmann::json defaults = root.value("defaults", nlohmann::json::object());
  if (!defaults.is_object()) config_error(source_name, top, "'defaults' must be an object");

  const auto starts = locate_run_entries(text);
  std::set<std::tuple<std::string, std::string, std::uint64_t>> seen;
  const auto& runs = root.at("runs");
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const TextPosition where = i < starts.size() ? position_of(text, starts[i]) : top;
    try {
      nlohmann::json entry = defaults;
      if (!runs[i].is_object()) throw Error(ErrorCode::InvalidConfig, "run entry must be an object");
      entry.merge_patch(runs[i]);
      const auto seeds = parse_seeds(entry, spec.replications);
      std::string label;
      if (entry.contains("label")) label = entry.at("label").get<std::string>();
      entry.erase("seeds");
      entry.erase("label");
      if (!entry.contains("benchmark")) throw Error(ErrorCode::InvalidConfig, "run needs a 'benchmark'");
      const auto id = parse_benchmark_id(entry.at("benchmark").get<std::string>());
      if (!entry.contains("D")) entry["D"] = id.big_d;
      if (!entry.contains("d")) entry["d"] = id.effective_dim;

      RunConfig base = run_config_from_json(entry);
      if (base.big_d != id.big_d) {
        throw Error(ErrorCode::InvalidConfig, "D=" + std::to_string(base.big_d) + " disagrees with benchmark '" +
                                                  id.name + "'");
      }
      if (label.empty()) label = std::string(to_string(base.method));
      for (const auto seed : seeds) {
        ExperimentRun run{label, base};
        run.config.seed = seed + seed_offset;
        run.config.validate();
        if (!seen.insert({label, id.name, run.config.seed}).second) {
          throw Error(ErrorCode::InvalidConfig, "duplicate seed " + std::to_string(run.config.seed) + " for (" +
                                                    label + ", " + id.name + ")");
        }
        spec.runs.push_back(std::move(run));
      }
    } catch (const Error& ex) {
      config_error(source_name, where, "runs[" + std::to_string(i) + "]: " + ex.message());
    } catch (const nlohmann::json::exception& ex) {
      config_error(source_name, where, "runs[" + std::to_string(i) + "]: " + ex.what());
    }
  }
  return spec;
}

int default_thread_count() {
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CREMBO_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) threads = threads > 0 ? std::min(threads, cap) : cap;
  }
  return std::max(threads, 1);
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec, const fs::path& output_dir, int threads) {
  fs::create_directories(output_dir / "runs");
  std::vector<std::optional<RunResult>> results(spec.runs.size());
  std::vector<std::string> errors(spec.runs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < spec.runs.size(); i = next++) {
      const auto& r = spec.runs[i];
      try {
        const auto objective = make_benchmark(r.config.benchmark, r.config.seed);
        results[i] = run(r.config, [&](const Eigen::VectorXd& x) { return evaluate_embedded(objective, x); });
        write_history(output_dir / "runs" / run_file_name(r), r, *results[i]);
      } catch (const std::exception& ex) {
        results[i].reset();
        errors[i] = run_file_name(r) + ": " + ex.what();
      }
    }
  };
  const int pool = std::max(1, std::min<int>(threads, static_cast<int>(spec.runs.size())));
  std::vector<std::thread> workers;
  for (int t = 1; t < pool; ++t) workers.emplace_back(worker);
  worker();
  for (auto& t : workers) t.join();

  ExperimentOutcome outcome;
  std::ofstream trace(output_dir / "trace.csv");
  trace << "method,benchmark,seed,eval_index,z,value,best_so_far\n";
  for (std::size_t i = 0; i < spec.runs.size(); ++i) {
    if (!results[i]) {
      outcome.failures.push_back(errors[i]);
      continue;
    }
    ++outcome.completed;
    const auto& r = spec.runs[i];
    const auto& res = *results[i];
    for (std::size_t k = 0; k < res.history.size(); ++k) {
      trace << r.label << ',' << r.config.benchmark << ',' << r.config.seed << ',' << (k + 1) << ','
            << res.history[k].z << ',' << format_double(res.history[k].value) << ','
            << format_double(res.best_value_trace[k]) << '\n';
    }
  }
  return outcome;
}

void summarize_trace(const fs::path& trace_csv, const fs::path& output_dir) {
  const CsvTable table = read_csv(trace_csv);
  const auto c_method = table.column("method");
  const auto c_bench = table.column("benchmark");
  const auto c_seed = table.column("seed");
  const auto c_eval = table.column("eval_index");
  const auto c_z = table.column("z");
  table.column("value");
  const auto c_best = table.column("best_so_far");

  std::map<std::tuple<std::string, std::string, long>, std::vector<double>> cells;
  std::map<std::tuple<std::string, std::string, long, long>, int> z_counts;
  for (const auto& row : table.rows) {
    const long eval = parse_long(row[c_eval], "eval_index");
    const long seed = parse_long(row[c_seed], "seed");
    const long z = parse_long(row[c_z], "z");
    cells[{row[c_method], row[c_bench], eval}].push_back(parse_double(row[c_best], "best_so_far"));
    ++z_counts[{row[c_method], row[c_bench], seed, z}];
  }

  fs::create_directories(output_dir);
  std::ofstream summary(output_dir / "summary.csv");
  summary << "method,benchmark,eval_index,n_seeds,median,q25,q75,iqr\n";
  for (const auto& [key, values] : cells) {
    const double q25 = quantile(values, 0.25), q75 = quantile(values, 0.75);
    summary << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ',' << values.size() << ','
            << format_double(quantile(values, 0.5)) << ',' << format_double(q25) << ',' << format_double(q75) << ','
            << format_double(q75 - q25) << '\n';
  }
  std::ofstream hist(output_dir / "z_hist.csv");
  hist << "method,benchmark,seed,z,count\n";
  for (const auto& [key, count] : z_counts) {
    hist << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ',' << std::get<3>(key) << ','
         << count << '\n';
  }
}

int cmd_run(const fs::path& spec_file, const std::optional<fs::path>& output_dir, std::uint64_t seed_offset,
            std::ostream& out, std::ostream& err) {
  ExperimentSpec spec;
  fs::path dir;
  try {
    std::ifstream in(spec_file);
    if (!in) throw Error(ErrorCode::InvalidConfig, spec_file.string() + ": cannot open spec file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    spec = parse_experiment_spec(buffer.str(), spec_file.string(), seed_offset);
    dir = output_dir ? *output_dir : spec.output_dir;
    fs::create_directories(dir);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return 2;
  }
  const auto outcome = run_experiment(spec, dir, default_thread_count());
  out << "completed " << outcome.completed << " of " << spec.runs.size() << " runs; trace written to "
      << (dir / "trace.csv").string() << '\n';
  for (const auto& f : outcome.failures) err << "run failed: " << f << '\n';
  return outcome.failures.empty() ? 0 : 3;
}

int cmd_summarize(const fs::path& trace_csv, const std::optional<fs::path>& output_dir, std::ostream& out,
                  std::ostream& err) {
  try {
    const fs::path dir = output_dir ? *output_dir : trace_csv.parent_path();
    summarize_trace(trace_csv, dir.empty() ? fs::path(".") : dir);
    out << "wrote summary.csv and z_hist.csv\n";
    return 0;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return 2;
  }
}

int cmd_verify_rank(Eigen::Index big_d, Eigen::Index d, Eigen::Index effective_dim, int trials, std::uint64_t seed,
                    const fs::path& output_dir, std::ostream& out, std::ostream& err) {
  RankReport report;
  try {
    if (trials < 1) throw Error(ErrorCode::InvalidConfig, "trials must be >= 1");
    report = verify_rank_preservation(big_d, d, effective_dim, trials, seed);
  } catch (const Error& ex) {
    err << "usage error: " << ex.what() << '\n';
    return 2;
  }
  const auto j = to_json(report);
  fs::create_directories(output_dir);
  std::ofstream(output_dir / "report.json") << j.dump(2) << '\n';
  out << "rank(PhiᵀA) == d_e in " << report.full_rank_trials << "/" << report.trials << " trials (D=" << big_d
      << ", d=" << d << ", d_e=" << effective_dim << "): " << (j.at("passed").get<bool>() ? "PASS" : "FAIL") << '\n';
  return j.at("passed").get<bool>() ? 0 : 1;
}

int cmd_verify_recovery(const std::string& benchmark, Eigen::Index d, int seeds, std::uint64_t first_seed,
                        double tolerance, const fs::path& output_dir, std::ostream& out, std::ostream& err) {
  RecoverySweep sweep;
  try {
    if (seeds < 1) throw Error(ErrorCode::InvalidConfig, "seeds must be >= 1");
    sweep = verify_recovery_sweep(benchmark, d, seeds, first_seed, tolerance);
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::RankDeficient) {
      err << "verification failed: " << ex.what() << '\n';
      return 1;
    }
    err << "usage error: " << ex.what() << '\n';
    return 2;
  }
  const auto j = to_json(sweep);
  fs::create_directories(output_dir);
  std::ofstream(output_dir / "report.json") << j.dump(2) << '\n';
  out << "optimum recovery on " << benchmark << " over " << seeds << " seeds: max |f(Ay*) - f(x*)| = "
      << format_double(sweep.max_recovery_error) << " (tol " << format_double(tolerance)
      << "): " << (sweep.passed() ? "PASS" : "FAIL") << '\n';
  for (std::size_t k = 0; k < sweep.epsilons.size(); ++k) {
    out << "  eps=" << format_double(sweep.epsilons[k]) << ": |y*| <= sqrt(d_e)|x*|/eps in "
        << format_double(sweep.holds_over_epsilon_fraction[k]) << " of seeds; <= sqrt(d_e) eps |x*| in "
        << format_double(sweep.holds_times_epsilon_fraction[k]) << '\n';
  }
  return sweep.passed() ? 0 : 1;
}

}  // namespace crembo
