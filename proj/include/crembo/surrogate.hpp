#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "crembo/kernels.hpp"
#include "crembo/numerics.hpp"

namespace crembo {

/// Observed (x, z) -> y data with targets standardized to zero mean, unit variance.
struct TrainingSet {
  std::vector<AugmentedPoint> points;
  Eigen::VectorXd targets;  // standardized
  double target_mean = 0.0;
  double target_std = 1.0;

  /// Standardizes `values`; target_std falls back to 1 when all values are equal.
  static TrainingSet standardized(std::vector<AugmentedPoint> points, const Eigen::VectorXd& values);
  /// Uses `values` as-is (mean 0, std 1).
  static TrainingSet unscaled(std::vector<AugmentedPoint> points, const Eigen::VectorXd& values);

  Eigen::Index size() const { return targets.size(); }
  double raw_target(Eigen::Index i) const { return targets(i) * target_std + target_mean; }
  double best_raw_target() const;
};

struct GpHyperparameters {
  ContinuousKernelParams continuous;
  IndexKernelParams index;
  double noise_variance = 1e-6;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;  // latent function variance, noise excluded
};

struct IndexedPrediction {
  int z = 1;
  Prediction prediction;
};

/// Settings for hyperparameter fitting. All positive quantities are searched
/// in log-space; lengthscale bounds scale with `input_range`.
struct SurrogateConfig {
  ContinuousFamily family = ContinuousFamily::Matern52;
  IndexVariant index_variant = IndexVariant::SmoothExponential;
  int latent_dim = 2;

  double input_range = 1.0;
  double initial_lengthscale = 0.5;  // fraction of input_range
  double initial_signal_variance = 1.0;
  double initial_lambda = 1.0;
  double initial_noise_variance = 1e-4;

  double lengthscale_lower = 1e-3;  // fraction of input_range
  double lengthscale_upper = 1e3;
  double signal_variance_lower = 1e-3;
  double signal_variance_upper = 1e3;
  double lambda_lower = 1e-3;
  double lambda_upper = 1e3;
  double noise_floor = 1e-8;
  double noise_upper = 1.0;
  double latent_bound = 3.0;

  bool learn_noise = true;
  int restarts = 8;
  int max_evaluations_per_restart = 150;

  /// Hyperparameters before any fitting, for `d` inputs and `num_indices` embeddings.
  GpHyperparameters default_hyperparameters(Eigen::Index d, int num_indices) const;
};

/// Exact GP posterior over augmented inputs. Immutable once built.
class GpPosterior {
 public:
  GpPosterior(TrainingSet training, GpHyperparameters hyper);

  const TrainingSet& training() const { return training_; }
  const GpHyperparameters& hyperparameters() const { return hyper_; }
  const CholeskyFactor<double>& cholesky() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  Eigen::Index input_dim() const { return batch_.x.cols(); }
  int num_indices() const { return hyper_.index.num_indices; }

  /// Prior variance of the latent function in target units.
  double prior_variance() const;

  Prediction predict(const AugmentedPoint& q) const;
  /// Predictions for every row of `queries`; same values as `predict`.
  std::vector<Prediction> predict(const AugmentedBatch& queries) const;
  std::vector<IndexedPrediction> predict_by_index(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Log marginal likelihood of the standardized targets.
  double log_marginal_likelihood() const;

 private:
  TrainingSet training_;
  GpHyperparameters hyper_;
  AugmentedBatch batch_;
  CholeskyFactor<double> chol_;
  Eigen::VectorXd alpha_;
};

/// -1/2 yᵀα - Σ log L_ii - n/2 log 2π on the standardized targets.
double log_marginal_likelihood(const TrainingSet& training, const GpHyperparameters& hyper);

/// Maximizes the log marginal likelihood by multi-start Nelder–Mead in
/// log-space. Restart 0 begins at `warm_start` when given, otherwise at the
/// config defaults. With fewer than two points the defaults are used as-is.
GpPosterior fit(const TrainingSet& training, const SurrogateConfig& config, int num_indices,
                std::uint64_t seed, const std::optional<GpHyperparameters>& warm_start = std::nullopt);

nlohmann::json to_json(const GpHyperparameters& h);
GpHyperparameters hyperparameters_from_json(const nlohmann::json& j);

}  // namespace crembo
