// Command-line harness: run experiment specs, summarize traces, and run the
// Monte-Carlo embedding checks.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "crembo/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Random-embedding Bayesian optimization experiments"};
  app.require_subcommand(1);

  std::string spec_file;
  std::string run_out;
  std::uint64_t seed_offset = 0;
  auto* run = app.add_subcommand("run", "Execute every run in a JSON experiment spec");
  run->add_option("spec", spec_file, "Experiment spec (JSON)")->required();
  run->add_option("--out", run_out, "Output directory (overrides the spec's output_dir)");
  run->add_option("--seed-offset", seed_offset, "Added to every seed in the spec");

  std::string trace_csv;
  std::string summary_out;
  auto* summarize = app.add_subcommand("summarize", "Median/IQR of best-so-far and z histograms from trace.csv");
  summarize->add_option("trace", trace_csv, "trace.csv produced by 'run'")->required();
  summarize->add_option("--out", summary_out, "Output directory (defaults to the trace's directory)");

  auto* verify = app.add_subcommand("verify", "Monte-Carlo checks of the embedding guarantees");
  verify->require_subcommand(1);
  std::string verify_out = ".";
  verify->add_option("--out", verify_out, "Directory for report.json");

  long big_d = 21, d = 8, de = 6;
  int trials = 1000;
  std::uint64_t seed = 0;
  auto* rank = verify->add_subcommand("rank", "Fraction of trials where rank(PhiᵀA) == d_e");
  rank->add_option("--D", big_d, "High dimension");
  rank->add_option("--d", d, "Embedding dimension");
  rank->add_option("--de", de, "Effective dimension");
  rank->add_option("--trials", trials, "Number of Monte-Carlo trials");
  rank->add_option("--seed", seed, "Base seed");
  rank->add_option("--out", verify_out, "Directory for report.json");

  std::string benchmark = "sphere_d4_D50";
  int seeds = 100;
  long recovery_d = 0;
  double tolerance = 1e-6;
  auto* recovery = verify->add_subcommand("recovery", "Recover the subspace optimizer through y* with PhiᵀA y* = c");
  recovery->add_option("--benchmark", benchmark, "Benchmark id");
  recovery->add_option("--seeds", seeds, "Number of seeds");
  recovery->add_option("--first-seed", seed, "First seed");
  recovery->add_option("--d", recovery_d, "Embedding dimension (default: effective dimension)");
  recovery->add_option("--tol", tolerance, "Maximum allowed |f(Ay*) - f(x*)|");
  recovery->add_option("--out", verify_out, "Directory for report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) {
    return crembo::cmd_run(spec_file, run_out.empty() ? std::nullopt : std::optional<std::filesystem::path>(run_out),
                           seed_offset, std::cout, std::cerr);
  }
  if (summarize->parsed()) {
    return crembo::cmd_summarize(trace_csv,
                                 summary_out.empty() ? std::nullopt : std::optional<std::filesystem::path>(summary_out),
                                 std::cout, std::cerr);
  }
  if (rank->parsed()) {
    return crembo::cmd_verify_rank(big_d, d, de, trials, seed, verify_out, std::cout, std::cerr);
  }
  return crembo::cmd_verify_recovery(benchmark, recovery_d, seeds, seed, tolerance, verify_out, std::cout, std::cerr);
}
