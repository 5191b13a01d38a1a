#pragma once

// Experiment harness behind the command-line tool: spec parsing, parallel
// execution, and the tidy output files.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crembo/optimizer.hpp"

namespace crembo {

struct ExperimentRun {
  std::string label;  // trace "method" column; defaults to the method name
  RunConfig config;
};

struct ExperimentSpec {
  std::vector<ExperimentRun> runs;  // one entry per (template, seed)
  std::filesystem::path output_dir = "results";
  int replications = 1;
};

/// Parses a JSON experiment spec. Errors are InvalidConfig with a
/// "source:line:col: message" prefix.
ExperimentSpec parse_experiment_spec(std::string_view text, std::string_view source_name,
                                     std::uint64_t seed_offset = 0);

struct ExperimentOutcome {
  int completed = 0;
  std::vector<std::string> failures;
};

/// Executes every run (in parallel up to `threads`), then writes
/// runs/*.jsonl and trace.csv under `output_dir`.
ExperimentOutcome run_experiment(const ExperimentSpec& spec, const std::filesystem::path& output_dir, int threads);

/// Reads trace.csv, writes summary.csv and z_hist.csv into `output_dir`.
void summarize_trace(const std::filesystem::path& trace_csv, const std::filesystem::path& output_dir);

/// Worker count: CREMBO_THREADS when set, else hardware concurrency.
int default_thread_count();

// Command entry points. Return the process exit code.
int cmd_run(const std::filesystem::path& spec_file, const std::optional<std::filesystem::path>& output_dir,
            std::uint64_t seed_offset, std::ostream& out, std::ostream& err);
int cmd_summarize(const std::filesystem::path& trace_csv, const std::optional<std::filesystem::path>& output_dir,
                  std::ostream& out, std::ostream& err);
int cmd_verify_rank(Eigen::Index big_d, Eigen::Index d, Eigen::Index effective_dim, int trials, std::uint64_t seed,
                    const std::filesystem::path& output_dir, std::ostream& out, std::ostream& err);
int cmd_verify_recovery(const std::string& benchmark, Eigen::Index d, int seeds, std::uint64_t first_seed,
                        double tolerance, const std::filesystem::path& output_dir, std::ostream& out,
                        std::ostream& err);

}  // namespace crembo
