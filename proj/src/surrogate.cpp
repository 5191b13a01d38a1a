#include "crembo/surrogate.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "crembo/error.hpp"
#include "crembo/nelder_mead.hpp"
#include "crembo/rng.hpp"

namespace crembo {

namespace {

// Latent variances below this fraction of the prior are round-off.
constexpr double kVarianceFloor = 1e-10;

// Maps GpHyperparameters onto the unconstrained search vector:
// [log sf2, log l_1..l_d, (log noise), (log lambda), (latents row-major)].
class ParameterPacking {
 public:
  ParameterPacking(const SurrogateConfig& config, Eigen::Index d, int num_indices)
      : config_(config), d_(d), k_(num_indices) {
    learn_noise_ = config.learn_noise;
    learn_lambda_ = config.index_variant == IndexVariant::SmoothExponential && k_ > 1;
    learn_latents_ = config.index_variant == IndexVariant::LearnedLatent && k_ > 1;
    r_ = config.latent_dim;

    const Eigen::Index n = size();
    lo_.resize(n);
    hi_.resize(n);
    Eigen::Index i = 0;
    lo_(i) = std::log(config.signal_variance_lower);
    hi_(i++) = std::log(config.signal_variance_upper);
    for (Eigen::Index j = 0; j < d_; ++j) {
      lo_(i) = std::log(config.lengthscale_lower * config.input_range);
      hi_(i++) = std::log(config.lengthscale_upper * config.input_range);
    }
    if (learn_noise_) {
      lo_(i) = std::log(config.noise_floor);
      hi_(i++) = std::log(config.noise_upper);
    }
    if (learn_lambda_) {
      lo_(i) = std::log(config.lambda_lower);
      hi_(i++) = std::log(config.lambda_upper);
    }
    if (learn_latents_) {
      for (Eigen::Index j = 0; j < k_ * r_; ++j) {
        lo_(i) = -config.latent_bound;
        hi_(i++) = config.latent_bound;
      }
    }
  }

  Eigen::Index size() const {
    return 1 + d_ + (learn_noise_ ? 1 : 0) + (learn_lambda_ ? 1 : 0) + (learn_latents_ ? k_ * r_ : 0);
  }
  const Eigen::VectorXd& lower() const { return lo_; }
  const Eigen::VectorXd& upper() const { return hi_; }

  Eigen::VectorXd pack(const GpHyperparameters& h) const {
    Eigen::VectorXd v(size());
    Eigen::Index i = 0;
    v(i++) = std::log(h.continuous.signal_variance);
    for (Eigen::Index j = 0; j < d_; ++j) v(i++) = std::log(h.continuous.lengthscales(j));
    if (learn_noise_) v(i++) = std::log(std::max(h.noise_variance, config_.noise_floor));
    if (learn_lambda_) v(i++) = std::log(std::max(h.index.lambda, config_.lambda_lower));
    if (learn_latents_) {
      for (int z = 0; z < k_; ++z)
        for (int c = 0; c < r_; ++c) v(i++) = h.index.latents(z, c);
    }
    return v.cwiseMax(lo_).cwiseMin(hi_);
  }

  GpHyperparameters unpack(const Eigen::VectorXd& v, const GpHyperparameters& base) const {
    GpHyperparameters h = base;
    Eigen::Index i = 0;
    h.continuous.signal_variance = std::exp(v(i++));
    for (Eigen::Index j = 0; j < d_; ++j) h.continuous.lengthscales(j) = std::exp(v(i++));
    if (learn_noise_) h.noise_variance = std::exp(v(i++));
    if (learn_lambda_) h.index.lambda = std::exp(v(i++));
    if (learn_latents_) {
      for (int z = 0; z < k_; ++z)
        for (int c = 0; c < r_; ++c) h.index.latents(z, c) = v(i++);
    }
    return h;
  }

  /// Restart point drawn from a moderate region inside the bounds.
  Eigen::VectorXd random_start(Rng& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto log_uniform = [&](double a, double b) { return std::log(a) + unit(rng) * (std::log(b) - std::log(a)); };
    Eigen::VectorXd v(size());
    Eigen::Index i = 0;
    v(i++) = log_uniform(0.1, 10.0);
    for (Eigen::Index j = 0; j < d_; ++j) v(i++) = log_uniform(0.05 * config_.input_range, 2.0 * config_.input_range);
    if (learn_noise_) v(i++) = log_uniform(std::max(config_.noise_floor, 1e-6), 1e-2);
    if (learn_lambda_) v(i++) = log_uniform(0.1, 3.0);
    if (learn_latents_) {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index j = 0; j < k_ * r_; ++j) v(i++) = normal(rng);
    }
    return v.cwiseMax(lo_).cwiseMin(hi_);
  }

 private:
  const SurrogateConfig& config_;
  Eigen::Index d_;
  int k_;
  int r_ = 2;
  bool learn_noise_ = false;
  bool learn_lambda_ = false;
  bool learn_latents_ = false;
  Eigen::VectorXd lo_, hi_;
};

CholeskyFactor<double> factor_covariance(const AugmentedBatch& batch, const GpHyperparameters& h) {
  Eigen::MatrixXd k = cross_covariance(h.continuous, h.index, batch, batch);
  k.diagonal().array() += h.noise_variance;
  return cholesky(k, 0.0);
}

double lml_from_factor(const CholeskyFactor<double>& chol, const Eigen::VectorXd& y, const Eigen::VectorXd& alpha) {
  const double n = static_cast<double>(y.size());
  return -0.5 * y.dot(alpha) - chol.lower.diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

}  // namespace

TrainingSet TrainingSet::standardized(std::vector<AugmentedPoint> points, const Eigen::VectorXd& values) {
  if (points.empty() || static_cast<Eigen::Index>(points.size()) != values.size()) {
    throw Error(ErrorCode::DimensionMismatch, "training set needs one target per point");
  }
  TrainingSet t;
  t.points = std::move(points);
  t.target_mean = values.mean();
  const double var = (values.array() - t.target_mean).square().mean();
  t.target_std = var > 0.0 ? std::sqrt(var) : 1.0;
  t.targets = (values.array() - t.target_mean) / t.target_std;
  return t;
}

TrainingSet TrainingSet::unscaled(std::vector<AugmentedPoint> points, const Eigen::VectorXd& values) {
  if (points.empty() || static_cast<Eigen::Index>(points.size()) != values.size()) {
    throw Error(ErrorCode::DimensionMismatch, "training set needs one target per point");
  }
  TrainingSet t;
  t.points = std::move(points);
  t.targets = values;
  return t;
}

double TrainingSet::best_raw_target() const {
  return targets.minCoeff() * target_std + target_mean;
}

GpHyperparameters SurrogateConfig::default_hyperparameters(Eigen::Index d, int num_indices) const {
  GpHyperparameters h;
  h.continuous.family = family;
  h.continuous.signal_variance = initial_signal_variance;
  h.continuous.lengthscales = Eigen::VectorXd::Constant(d, initial_lengthscale * input_range);
  h.index.variant = index_variant;
  h.index.num_indices = num_indices;
  h.index.lambda = initial_lambda;
  if (index_variant == IndexVariant::LearnedLatent) {
    // Spread latents along the first axis so the default is not fully shared.
    h.index.latents = Eigen::MatrixXd::Zero(num_indices, latent_dim);
    for (int z = 0; z < num_indices; ++z) h.index.latents(z, 0) = static_cast<double>(z);
  }
  h.noise_variance = std::max(initial_noise_variance, noise_floor);
  return h;
}

GpPosterior::GpPosterior(TrainingSet training, GpHyperparameters hyper)
    : training_(std::move(training)), hyper_(std::move(hyper)) {
  batch_ = AugmentedBatch::from_points(training_.points);
  if (batch_.x.cols() != hyper_.continuous.lengthscales.size()) {
    throw Error(ErrorCode::DimensionMismatch, "training inputs do not match kernel lengthscales");
  }
  chol_ = factor_covariance(batch_, hyper_);
  alpha_ = solve_cholesky(chol_, training_.targets);
}

double GpPosterior::prior_variance() const {
  return hyper_.continuous.signal_variance * training_.target_std * training_.target_std;
}

std::vector<Prediction> GpPosterior::predict(const AugmentedBatch& queries) const {
  if (queries.size() > 0 && queries.x.cols() != input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "query dimension differs from training inputs");
  }
  const Eigen::MatrixXd cross = cross_covariance(hyper_.continuous, hyper_.index, queries, batch_);
  const Eigen::VectorXd mean = cross * alpha_;
  const Eigen::MatrixXd v = chol_.lower.triangularView<Eigen::Lower>().solve(cross.transpose());
  const double sf2 = hyper_.continuous.signal_variance;
  const double scale2 = training_.target_std * training_.target_std;

  std::vector<Prediction> out(static_cast<std::size_t>(queries.size()));
  for (Eigen::Index i = 0; i < queries.size(); ++i) {
    double var = sf2 - v.col(i).squaredNorm();
    if (var < kVarianceFloor * sf2) var = 0.0;
    out[static_cast<std::size_t>(i)] = {mean(i) * training_.target_std + training_.target_mean, var * scale2};
  }
  return out;
}

Prediction GpPosterior::predict(const AugmentedPoint& q) const {
  if (q.x.size() != input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "query dimension differs from training inputs");
  }
  AugmentedBatch single;
  single.x = q.x.transpose();
  single.z = Eigen::VectorXi::Constant(1, q.z);
  return predict(single).front();
}

std::vector<IndexedPrediction> GpPosterior::predict_by_index(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "query dimension differs from training inputs");
  }
  const int k = num_indices();
  AugmentedBatch queries;
  queries.x = x.transpose().replicate(k, 1);
  queries.z = Eigen::VectorXi::LinSpaced(k, 1, k);
  const auto preds = predict(queries);
  std::vector<IndexedPrediction> out;
  for (int z = 1; z <= k; ++z) out.push_back({z, preds[static_cast<std::size_t>(z - 1)]});
  return out;
}

double GpPosterior::log_marginal_likelihood() const {
  return lml_from_factor(chol_, training_.targets, alpha_);
}

double log_marginal_likelihood(const TrainingSet& training, const GpHyperparameters& hyper) {
  const auto batch = AugmentedBatch::from_points(training.points);
  if (batch.x.cols() != hyper.continuous.lengthscales.size()) {
    throw Error(ErrorCode::DimensionMismatch, "training inputs do not match kernel lengthscales");
  }
  const auto chol = factor_covariance(batch, hyper);
  const Eigen::VectorXd alpha = solve_cholesky(chol, training.targets);
  return lml_from_factor(chol, training.targets, alpha);
}

GpPosterior fit(const TrainingSet& training, const SurrogateConfig& config, int num_indices,
                std::uint64_t seed, const std::optional<GpHyperparameters>& warm_start) {
  if (training.size() == 0) throw Error(ErrorCode::DimensionMismatch, "fit: empty training set");
  const Eigen::Index d = training.points.front().x.size();
  const GpHyperparameters defaults = config.default_hyperparameters(d, num_indices);
  if (training.size() < 2) return GpPosterior(training, defaults);

  const ParameterPacking packing(config, d, num_indices);
  const auto batch = AugmentedBatch::from_points(training.points);
  auto negative_lml = [&](const Eigen::VectorXd& v) {
    const GpHyperparameters h = packing.unpack(v, defaults);
    try {
      const auto chol = factor_covariance(batch, h);
      const Eigen::VectorXd alpha = solve_cholesky(chol, training.targets);
      return -lml_from_factor(chol, training.targets, alpha);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Rng rng(seed);
  NelderMeadOptions options;
  options.max_evaluations = config.max_evaluations_per_restart;
  options.initial_step = 0.5;

  Eigen::VectorXd best_v;
  double best_value = std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, config.restarts);
  for (int r = 0; r < restarts; ++r) {
    const Eigen::VectorXd start =
        r == 0 ? packing.pack(warm_start ? *warm_start : defaults) : packing.random_start(rng);
    const auto result = nelder_mead_minimize(negative_lml, start, packing.lower(), packing.upper(), options);
    if (result.value < best_value) {
      best_value = result.value;
      best_v = result.x;
    }
  }
  if (!std::isfinite(best_value)) {
    // Every restart hit a factorization failure; fall back to the defaults,
    // which surfaces NotPositiveDefinite from the constructor if it persists.
    return GpPosterior(training, defaults);
  }
  return GpPosterior(training, packing.unpack(best_v, defaults));
}

nlohmann::json to_json(const GpHyperparameters& h) {
  nlohmann::json latents = nlohmann::json::array();
  for (Eigen::Index i = 0; i < h.index.latents.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(h.index.latents.cols()));
    for (Eigen::Index j = 0; j < h.index.latents.cols(); ++j) row[static_cast<std::size_t>(j)] = h.index.latents(i, j);
    latents.push_back(row);
  }
  return {
      {"family", std::string(to_string(h.continuous.family))},
      {"signal_variance", h.continuous.signal_variance},
      {"lengthscales", std::vector<double>(h.continuous.lengthscales.data(),
                                           h.continuous.lengthscales.data() + h.continuous.lengthscales.size())},
      {"index_variant", std::string(to_string(h.index.variant))},
      {"num_indices", h.index.num_indices},
      {"lambda", h.index.lambda},
      {"latents", latents},
      {"noise_variance", h.noise_variance},
  };
}

GpHyperparameters hyperparameters_from_json(const nlohmann::json& j) {
  GpHyperparameters h;
  h.continuous.family = continuous_family_from_string(j.at("family").get<std::string>());
  h.continuous.signal_variance = j.at("signal_variance").get<double>();
  const auto ls = j.at("lengthscales").get<std::vector<double>>();
  h.continuous.lengthscales = Eigen::Map<const Eigen::VectorXd>(ls.data(), static_cast<Eigen::Index>(ls.size()));
  h.index.variant = index_variant_from_string(j.at("index_variant").get<std::string>());
  h.index.num_indices = j.at("num_indices").get<int>();
  h.index.lambda = j.at("lambda").get<double>();
  const auto latents = j.at("latents").get<std::vector<std::vector<double>>>();
  if (!latents.empty()) {
    h.index.latents.resize(static_cast<Eigen::Index>(latents.size()), static_cast<Eigen::Index>(latents[0].size()));
    for (std::size_t i = 0; i < latents.size(); ++i)
      for (std::size_t c = 0; c < latents[i].size(); ++c)
        h.index.latents(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = latents[i][c];
  }
  h.noise_variance = j.at("noise_variance").get<double>();
  return h;
}

}  // namespace crembo
