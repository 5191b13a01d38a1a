#include "crembo/verification.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "crembo/error.hpp"
#include "crembo/numerics.hpp"
#include "crembo/rng.hpp"

namespace crembo {

namespace {

constexpr double kRankTolerance = 1e-10;

Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

}  // namespace

RankReport verify_rank_preservation(Eigen::Index big_d, Eigen::Index d, Eigen::Index effective_dim, int trials,
                                    std::uint64_t seed) {
  if (effective_dim < 1 || d < effective_dim || big_d < d) {
    throw Error(ErrorCode::InvalidDimensions, "need 1 <= d_e <= d <= D");
  }
  RankReport report{big_d, d, effective_dim, trials, 0};
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {kTagTrial, static_cast<std::uint64_t>(t)}));
    const Eigen::MatrixXd phi = qr_orthonormalize(gaussian(rng, big_d, effective_dim));
    const Eigen::MatrixXd a = gaussian(rng, big_d, d);
    if (numerical_rank(phi.transpose() * a, kRankTolerance) == effective_dim) ++report.full_rank_trials;
  }
  return report;
}

RecoveryReport verify_optimum_recovery(const EmbeddedObjective& o, const Embedding& e,
                                       const std::vector<double>& epsilons) {
  if (e.big_d() != o.big_d()) throw Error(ErrorCode::DimensionMismatch, "embedding and objective differ in D");
  const auto x_top = o.optimizer_in_subspace();
  if (!x_top) throw Error(ErrorCode::InvalidConfig, "objective has no known optimizer");

  const Eigen::MatrixXd reduced = o.basis.transpose() * e.a;  // d_e x d
  if (numerical_rank(reduced, kRankTolerance) < o.effective_dim()) {
    throw Error(ErrorCode::RankDeficient, "ΦᵀA is rank deficient");
  }
  const Eigen::VectorXd c = o.basis.transpose() * *x_top;

  RecoveryReport report;
  report.y_star = reduced.completeOrthogonalDecomposition().solve(c);
  report.subspace_residual = (reduced * report.y_star - c).norm();
  const Eigen::VectorXd x = e.a * report.y_star;
  report.recovery_error = std::abs(evaluate_embedded(o, x) - evaluate_embedded(o, *x_top));
  report.y_norm = report.y_star.norm();
  report.x_top_norm = x_top->norm();
  const double root_de = std::sqrt(static_cast<double>(o.effective_dim()));
  for (double eps : epsilons) {
    NormBoundCheck b;
    b.epsilon = eps;
    b.bound_over_epsilon = root_de * report.x_top_norm / eps;
    b.holds_over_epsilon = report.y_norm <= b.bound_over_epsilon;
    b.bound_times_epsilon = root_de * eps * report.x_top_norm;
    b.holds_times_epsilon = report.y_norm <= b.bound_times_epsilon;
    report.bounds.push_back(b);
  }
  return report;
}

RecoverySweep verify_recovery_sweep(const std::string& benchmark, Eigen::Index d, int seeds, std::uint64_t first_seed,
                                    double tolerance) {
  const auto id = parse_benchmark_id(benchmark);
  RecoverySweep sweep;
  sweep.benchmark = benchmark;
  sweep.d = d > 0 ? d : id.effective_dim;
  sweep.seeds = seeds;
  sweep.tolerance = tolerance;
  sweep.epsilons = {0.1, 0.5};
  if (sweep.d < id.effective_dim || sweep.d > id.big_d) {
    throw Error(ErrorCode::InvalidDimensions, "need d_e <= d <= D for recovery");
  }
  std::vector<int> over(sweep.epsilons.size(), 0), times(sweep.epsilons.size(), 0);
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = first_seed + static_cast<std::uint64_t>(s);
    const auto objective = make_embedded_objective(id.base, id.effective_dim, id.big_d, seed, id.rotated);
    const auto embedding = sample_embedding(derive_seed(seed, {kTagEmbedding, 0}), id.big_d, sweep.d);
    const auto report = verify_optimum_recovery(objective, embedding, sweep.epsilons);
    sweep.max_recovery_error = std::max(sweep.max_recovery_error, report.recovery_error);
    sweep.y_norms.push_back(report.y_norm);
    for (std::size_t k = 0; k < report.bounds.size(); ++k) {
      over[k] += report.bounds[k].holds_over_epsilon ? 1 : 0;
      times[k] += report.bounds[k].holds_times_epsilon ? 1 : 0;
    }
  }
  for (std::size_t k = 0; k < sweep.epsilons.size(); ++k) {
    sweep.holds_over_epsilon_fraction.push_back(seeds > 0 ? static_cast<double>(over[k]) / seeds : 0.0);
    sweep.holds_times_epsilon_fraction.push_back(seeds > 0 ? static_cast<double>(times[k]) / seeds : 0.0);
  }
  return sweep;
}

nlohmann::json to_json(const RankReport& r) {
  return {{"check", "rank"},
          {"D", r.big_d},
          {"d", r.d},
          {"d_e", r.effective_dim},
          {"trials", r.trials},
          {"full_rank_trials", r.full_rank_trials},
          {"fraction", r.fraction()},
          {"passed", r.full_rank_trials == r.trials}};
}

nlohmann::json to_json(const RecoverySweep& r) {
  std::vector<double> sorted = r.y_norms;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  nlohmann::json bounds = nlohmann::json::array();
  for (std::size_t k = 0; k < r.epsilons.size(); ++k) {
    bounds.push_back({{"epsilon", r.epsilons[k]},
                      {"fraction_within_sqrt_de_over_eps", r.holds_over_epsilon_fraction[k]},
                      {"fraction_within_sqrt_de_times_eps", r.holds_times_epsilon_fraction[k]}});
  }
  return {{"check", "recovery"},
          {"benchmark", r.benchmark},
          {"d", r.d},
          {"seeds", r.seeds},
          {"tolerance", r.tolerance},
          {"max_recovery_error", r.max_recovery_error},
          {"y_norm_quantiles", {{"q05", quantile(0.05)}, {"q50", quantile(0.5)}, {"q95", quantile(0.95)}}},
          {"norm_bounds", bounds},
          {"passed", r.passed()}};
}

}  // namespace crembo
