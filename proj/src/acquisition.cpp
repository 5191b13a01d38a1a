#include "crembo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "crembo/error.hpp"
#include "crembo/rng.hpp"

namespace crembo {

namespace {

constexpr double kInitialStepFraction = 0.25;
constexpr double kMinStepFraction = 1e-6;

bool lexicographically_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

std::vector<double> score(const GpPosterior& posterior, const AcquisitionConfig& cfg, const AugmentedBatch& batch,
                          double incumbent) {
  const auto preds = posterior.predict(batch);
  std::vector<double> out(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) out[i] = acquisition_value(cfg, preds[i], incumbent);
  return out;
}

struct Candidate {
  Eigen::VectorXd x;
  double value;
};

Candidate pattern_search(const GpPosterior& posterior, const AcquisitionConfig& cfg, double half_width, int z,
                         double incumbent, Candidate start) {
  const Eigen::Index d = start.x.size();
  double step = kInitialStepFraction * half_width;
  AugmentedBatch probes;
  probes.x.resize(2 * d, d);
  probes.z = Eigen::VectorXi::Constant(2 * d, z);
  for (int s = 0; s < cfg.local_steps && step >= kMinStepFraction * half_width; ++s) {
    for (Eigen::Index c = 0; c < d; ++c) {
      probes.x.row(2 * c) = start.x.transpose();
      probes.x.row(2 * c + 1) = start.x.transpose();
      probes.x(2 * c, c) = std::min(start.x(c) + step, half_width);
      probes.x(2 * c + 1, c) = std::max(start.x(c) - step, -half_width);
    }
    const auto values = score(posterior, cfg, probes, incumbent);
    const auto best = std::max_element(values.begin(), values.end()) - values.begin();
    if (values[static_cast<std::size_t>(best)] > start.value) {
      start.x = probes.x.row(best).transpose();
      start.value = values[static_cast<std::size_t>(best)];
    } else {
      step *= 0.5;
    }
  }
  return start;
}

}  // namespace

std::string_view to_string(AcquisitionFunction f) {
  return f == AcquisitionFunction::ExpectedImprovement ? "ei" : "ucb";
}

AcquisitionFunction acquisition_function_from_string(std::string_view name) {
  if (name == "ei" || name == "expected_improvement") return AcquisitionFunction::ExpectedImprovement;
  if (name == "ucb") return AcquisitionFunction::Ucb;
  throw Error(ErrorCode::InvalidConfig, "unknown acquisition function '" + std::string(name) + "'");
}

void AcquisitionConfig::validate(Eigen::Index d) const {
  if (restarts < 1) throw Error(ErrorCode::InvalidConfig, "acquisition restarts must be >= 1");
  if (pool_size(d) < restarts) throw Error(ErrorCode::InvalidConfig, "candidate_pool must be >= restarts");
  if (local_steps < 0) throw Error(ErrorCode::InvalidConfig, "local_steps must be >= 0");
  if (!(ucb_beta > 0.0)) throw Error(ErrorCode::InvalidConfig, "ucb_beta must be positive");
}

double expected_improvement(double mean, double variance, double incumbent_best) {
  const double improvement = incumbent_best - mean;
  const double sigma = std::sqrt(std::max(variance, 0.0));
  if (!(sigma > 0.0)) return std::max(improvement, 0.0);
  const double u = improvement / sigma;
  const double cdf = 0.5 * std::erfc(-u / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(improvement * cdf + sigma * pdf, 0.0);
}

double ucb(double mean, double variance, double beta) {
  return -(mean - std::sqrt(beta) * std::sqrt(std::max(variance, 0.0)));
}

double acquisition_value(const AcquisitionConfig& cfg, const Prediction& p, double incumbent_best) {
  return cfg.function == AcquisitionFunction::ExpectedImprovement ? expected_improvement(p.mean, p.variance, incumbent_best)
                                                                  : ucb(p.mean, p.variance, cfg.ucb_beta);
}

AcquisitionChoice maximize_at_index(const GpPosterior& posterior, const AcquisitionConfig& cfg, double half_width,
                                    int z, std::uint64_t seed) {
  const Eigen::Index d = posterior.input_dim();
  cfg.validate(d);
  if (z < 1 || z > posterior.num_indices()) {
    throw Error(ErrorCode::IndexOutOfRange, "acquisition index " + std::to_string(z) + " out of range");
  }
  const double incumbent = posterior.training().best_raw_target();

  Rng rng(derive_seed(seed, {kTagAcquisition, static_cast<std::uint64_t>(z)}));
  std::uniform_real_distribution<double> uniform(-half_width, half_width);
  const int pool = cfg.pool_size(d);
  AugmentedBatch candidates;
  candidates.x.resize(pool, d);
  candidates.z = Eigen::VectorXi::Constant(pool, z);
  for (int i = 0; i < pool; ++i)
    for (Eigen::Index c = 0; c < d; ++c) candidates.x(i, c) = uniform(rng);
  const auto values = score(posterior, cfg, candidates, incumbent);

  std::vector<int> order(static_cast<std::size_t>(pool));
  std::iota(order.begin(), order.end(), 0);
  const int keep = std::min(cfg.restarts, pool);
  std::partial_sort(order.begin(), order.begin() + keep, order.end(), [&](int a, int b) {
    const double va = values[static_cast<std::size_t>(a)], vb = values[static_cast<std::size_t>(b)];
    return va != vb ? va > vb : a < b;
  });

  AcquisitionChoice best;
  best.point.z = z;
  best.best_pool_value = values[static_cast<std::size_t>(order[0])];
  bool have_best = false;
  for (int r = 0; r < keep; ++r) {
    const int idx = order[static_cast<std::size_t>(r)];
    Candidate refined = pattern_search(posterior, cfg, half_width, z, incumbent,
                                       {candidates.x.row(idx).transpose(), values[static_cast<std::size_t>(idx)]});
    if (!have_best || refined.value > best.value ||
        (refined.value == best.value && lexicographically_less(refined.x, best.point.x))) {
      best.point.x = std::move(refined.x);
      best.value = refined.value;
      have_best = true;
    }
  }
  return best;
}

AcquisitionChoice maximize_over_augmented(const GpPosterior& posterior, const AcquisitionConfig& cfg,
                                          double half_width, int num_indices, std::uint64_t seed) {
  if (num_indices < 1) throw Error(ErrorCode::InvalidConfig, "need at least one embedding index");
  AcquisitionChoice best = maximize_at_index(posterior, cfg, half_width, 1, seed);
  for (int z = 2; z <= num_indices; ++z) {
    AcquisitionChoice c = maximize_at_index(posterior, cfg, half_width, z, seed);
    if (c.value > best.value) best = std::move(c);
  }
  return best;
}

}  // namespace crembo
