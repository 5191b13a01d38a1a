#include "crembo/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <random>
#include <string>

#include "crembo/error.hpp"
#include "crembo/rng.hpp"

namespace crembo {

namespace {

constexpr int kStateVersion = 1;

void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, where + " must be an object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw Error(ErrorCode::InvalidConfig, "unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Rembo: return "rembo";
    case Method::Crembo: return "crembo";
    case Method::SaCrembo: return "sa_crembo";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  if (name == "rembo") return Method::Rembo;
  if (name == "crembo") return Method::Crembo;
  if (name == "sa_crembo" || name == "sacrembo") return Method::SaCrembo;
  throw Error(ErrorCode::InvalidConfig, "unknown method '" + std::string(name) + "'");
}

std::string_view to_string(CrossMode m) { return m == CrossMode::Paired ? "paired" : "alternate"; }

CrossMode cross_mode_from_string(std::string_view name) {
  if (name == "paired") return CrossMode::Paired;
  if (name == "alternate") return CrossMode::Alternate;
  throw Error(ErrorCode::InvalidConfig, "unknown cross_mode '" + std::string(name) + "'");
}

int RunConfig::num_indices() const {
  switch (method) {
    case Method::Rembo: return 1;
    case Method::Crembo: return 2;
    case Method::SaCrembo: return cross_pairs ? 2 * k_embeddings : k_embeddings;
  }
  return 1;
}

double RunConfig::half_width() const {
  return low_dim_half_width > 0.0 ? low_dim_half_width : default_low_dim_half_width(d);
}

SurrogateConfig RunConfig::effective_surrogate() const {
  SurrogateConfig s = surrogate;
  s.input_range = 2.0 * half_width();
  return s;
}

void RunConfig::validate() const {
  if (d < 1 || big_d < d) {
    throw Error(ErrorCode::InvalidConfig, "need D >= d >= 1, got D=" + std::to_string(big_d) + " d=" + std::to_string(d));
  }
  if (n_init < 2) throw Error(ErrorCode::InvalidConfig, "n_init must be >= 2");
  if (budget < n_init) throw Error(ErrorCode::InvalidConfig, "budget must be >= n_init");
  if (method == Method::SaCrembo && k_embeddings < 1) throw Error(ErrorCode::InvalidConfig, "K must be >= 1");
  if (!(high_dim_bound > 0.0) || low_dim_half_width < 0.0) {
    throw Error(ErrorCode::InvalidConfig, "box bounds must be positive");
  }
  if (full_refit_until < 0 || refit_interval < 1) throw Error(ErrorCode::InvalidConfig, "invalid refit schedule");
  if (surrogate.restarts < 1 || surrogate.max_evaluations_per_restart < 1) {
    throw Error(ErrorCode::InvalidConfig, "surrogate restarts and evaluations must be >= 1");
  }
  if (surrogate.latent_dim < 1) throw Error(ErrorCode::InvalidConfig, "latent_dim must be >= 1");
  acquisition.validate(d);
}

nlohmann::json to_json(const RunConfig& c) {
  const auto& s = c.surrogate;
  const auto& a = c.acquisition;
  return {
      {"method", std::string(to_string(c.method))},
      {"benchmark", c.benchmark},
      {"D", c.big_d},
      {"d", c.d},
      {"K", c.k_embeddings},
      {"cross_pairs", c.cross_pairs},
      {"cross_mode", std::string(to_string(c.cross_mode))},
      {"budget", c.budget},
      {"n_init", c.n_init},
      {"seed", c.seed},
      {"low_dim_half_width", c.low_dim_half_width},
      {"high_dim_bound", c.high_dim_bound},
      {"kernel",
       {{"family", std::string(to_string(s.family))},
        {"index", std::string(to_string(s.index_variant))},
        {"latent_dim", s.latent_dim},
        {"lengthscale", s.initial_lengthscale},
        {"signal_variance", s.initial_signal_variance},
        {"lambda", s.initial_lambda},
        {"noise_variance", s.initial_noise_variance},
        {"lengthscale_bounds", {s.lengthscale_lower, s.lengthscale_upper}},
        {"signal_variance_bounds", {s.signal_variance_lower, s.signal_variance_upper}},
        {"lambda_bounds", {s.lambda_lower, s.lambda_upper}},
        {"noise_bounds", {s.noise_floor, s.noise_upper}},
        {"learn_noise", s.learn_noise}}},
      {"surrogate",
       {{"restarts", s.restarts},
        {"max_evaluations", s.max_evaluations_per_restart},
        {"full_refit_until", c.full_refit_until},
        {"refit_interval", c.refit_interval}}},
      {"acquisition",
       {{"function", std::string(to_string(a.function))},
        {"ucb_beta", a.ucb_beta},
        {"restarts", a.restarts},
        {"local_steps", a.local_steps},
        {"candidate_pool", a.candidate_pool}}},
  };
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    check_keys(j,
               {"method", "benchmark", "D", "d", "K", "cross_pairs", "cross_mode", "budget", "n_init", "seed",
                "low_dim_half_width", "high_dim_bound", "kernel", "surrogate", "acquisition"},
               "run config");
    if (j.contains("method")) c.method = method_from_string(j.at("method").get<std::string>());
    read(j, "benchmark", c.benchmark);
    read(j, "D", c.big_d);
    read(j, "d", c.d);
    read(j, "K", c.k_embeddings);
    read(j, "cross_pairs", c.cross_pairs);
    if (j.contains("cross_mode")) c.cross_mode = cross_mode_from_string(j.at("cross_mode").get<std::string>());
    read(j, "budget", c.budget);
    read(j, "n_init", c.n_init);
    read(j, "seed", c.seed);
    read(j, "low_dim_half_width", c.low_dim_half_width);
    read(j, "high_dim_bound", c.high_dim_bound);

    auto& s = c.surrogate;
    if (j.contains("kernel")) {
      const auto& k = j.at("kernel");
      check_keys(k,
                 {"family", "index", "latent_dim", "lengthscale", "signal_variance", "lambda", "noise_variance",
                  "lengthscale_bounds", "signal_variance_bounds", "lambda_bounds", "noise_bounds", "learn_noise"},
                 "kernel block");
      if (k.contains("family")) s.family = continuous_family_from_string(k.at("family").get<std::string>());
      if (k.contains("index")) s.index_variant = index_variant_from_string(k.at("index").get<std::string>());
      read(k, "latent_dim", s.latent_dim);
      read(k, "lengthscale", s.initial_lengthscale);
      read(k, "signal_variance", s.initial_signal_variance);
      read(k, "lambda", s.initial_lambda);
      read(k, "noise_variance", s.initial_noise_variance);
      read(k, "learn_noise", s.learn_noise);
      auto bounds = [&](const char* key, double& lo, double& hi) {
        if (!k.contains(key)) return;
        const auto b = k.at(key).get<std::vector<double>>();
        if (b.size() != 2 || !(b[0] > 0.0) || !(b[1] >= b[0])) {
          throw Error(ErrorCode::InvalidConfig, std::string(key) + " must be [lower, upper] with 0 < lower <= upper");
        }
        lo = b[0];
        hi = b[1];
      };
      bounds("lengthscale_bounds", s.lengthscale_lower, s.lengthscale_upper);
      bounds("signal_variance_bounds", s.signal_variance_lower, s.signal_variance_upper);
      bounds("lambda_bounds", s.lambda_lower, s.lambda_upper);
      bounds("noise_bounds", s.noise_floor, s.noise_upper);
    }
    if (j.contains("surrogate")) {
      const auto& g = j.at("surrogate");
      check_keys(g, {"restarts", "max_evaluations", "full_refit_until", "refit_interval"}, "surrogate block");
      read(g, "restarts", s.restarts);
      read(g, "max_evaluations", s.max_evaluations_per_restart);
      read(g, "full_refit_until", c.full_refit_until);
      read(g, "refit_interval", c.refit_interval);
    }
    if (j.contains("acquisition")) {
      const auto& a = j.at("acquisition");
      check_keys(a, {"function", "ucb_beta", "restarts", "local_steps", "candidate_pool"}, "acquisition block");
      if (a.contains("function")) {
        c.acquisition.function = acquisition_function_from_string(a.at("function").get<std::string>());
      }
      read(a, "ucb_beta", c.acquisition.ucb_beta);
      read(a, "restarts", c.acquisition.restarts);
      read(a, "local_steps", c.acquisition.local_steps);
      read(a, "candidate_pool", c.acquisition.candidate_pool);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidConfig, ex.what());
  }
  return c;
}

nlohmann::json to_json(const Observation& o) {
  return {{"iteration", o.iteration},
          {"z", o.z},
          {"value", o.value},
          {"y_low", to_vector(o.y_low)},
          {"x_high", to_vector(o.x_high)}};
}

Observation observation_from_json(const nlohmann::json& j) {
  Observation o;
  o.iteration = j.at("iteration").get<int>();
  o.z = j.at("z").get<int>();
  o.value = j.at("value").get<double>();
  o.y_low = from_vector(j.at("y_low").get<std::vector<double>>());
  o.x_high = from_vector(j.at("x_high").get<std::vector<double>>());
  return o;
}

BoState::BoState(RunConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.method == Method::Rembo) config_.k_embeddings = 1;
  if (config_.method == Method::Crembo) config_.k_embeddings = 2;

  box_ = SearchBox::centered(config_.big_d, config_.half_width(), config_.high_dim_bound);
  const int random_count = config_.method == Method::SaCrembo ? config_.k_embeddings : 1;
  for (int k = 0; k < random_count; ++k) {
    embeddings_.push_back(
        sample_embedding(derive_seed(config_.seed, {kTagEmbedding, static_cast<std::uint64_t>(k)}), config_.big_d, config_.d));
  }
  if (config_.method == Method::Crembo) {
    embeddings_.push_back(orthogonalize(embeddings_[0]));
  } else if (config_.method == Method::SaCrembo && config_.cross_pairs) {
    for (int k = 0; k < random_count; ++k) embeddings_.push_back(orthogonalize(embeddings_[static_cast<std::size_t>(k)]));
  }
}

Suggestion BoState::make_suggestion(Eigen::VectorXd y, int z) const {
  Suggestion s;
  s.x_high = project_up(embeddings_[static_cast<std::size_t>(z - 1)], y, box_);
  s.y_low = std::move(y);
  s.z = z;
  return s;
}

Suggestion BoState::initial_design_point(int n) const {
  // Stratified design: each dimension gets one sample per stratum, with an
  // independent stratum permutation per dimension.
  const int m = config_.n_init;
  const double w = box_.low_dim_half_width;
  Rng rng(derive_seed(config_.seed, {kTagInitDesign}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd design(m, config_.d);
  std::vector<int> perm(static_cast<std::size_t>(m));
  for (Eigen::Index c = 0; c < config_.d; ++c) {
    for (int i = 0; i < m; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = m - 1; i > 0; --i) {
      std::uniform_int_distribution<int> pick(0, i);
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
    }
    for (int i = 0; i < m; ++i) {
      design(i, c) = -w + 2.0 * w * (perm[static_cast<std::size_t>(i)] + unit(rng)) / m;
    }
  }
  const int z = (n % config_.num_indices()) + 1;
  return make_suggestion(design.row(n).transpose(), z);
}

int BoState::iteration_for(int n) const {
  if (n < config_.n_init) return 0;
  const int step = n - config_.n_init;
  if (config_.method == Method::Crembo && config_.cross_mode == CrossMode::Paired) return 1 + step / 2;
  return 1 + step;
}

GpPosterior BoState::surrogate() {
  if (history_.empty()) throw Error(ErrorCode::StaleState, "no observations to fit");
  std::vector<AugmentedPoint> points;
  Eigen::VectorXd values(static_cast<Eigen::Index>(history_.size()));
  for (std::size_t i = 0; i < history_.size(); ++i) {
    points.push_back({history_[i].y_low, history_[i].z});
    values(static_cast<Eigen::Index>(i)) = history_[i].value;
  }
  const auto training = TrainingSet::standardized(std::move(points), values);
  const int n = static_cast<int>(history_.size());
  if (cached_hyper_ && cached_fit_size_ == n) return GpPosterior(training, *cached_hyper_);
  const bool refit = !cached_hyper_ || n <= config_.full_refit_until ||
                     n - cached_fit_size_ >= config_.refit_interval;
  if (!refit) {
    try {
      return GpPosterior(training, *cached_hyper_);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotPositiveDefinite) throw;
    }
  }

  const auto posterior = fit(training, config_.effective_surrogate(), config_.num_indices(),
                             derive_seed(config_.seed, {kTagFit, static_cast<std::uint64_t>(n)}), cached_hyper_);
  cached_hyper_ = posterior.hyperparameters();
  cached_fit_size_ = n;
  return posterior;
}

Suggestion BoState::ask() {
  if (done()) throw Error(ErrorCode::BudgetExhausted, "evaluation budget already spent");
  const int n = static_cast<int>(history_.size());
  if (n < config_.n_init) return initial_design_point(n);

  const GpPosterior posterior = surrogate();
  const double w = box_.low_dim_half_width;
  const std::uint64_t seed = derive_seed(config_.seed, {kTagAcquisition, static_cast<std::uint64_t>(n)});
  AcquisitionChoice choice;
  switch (config_.method) {
    case Method::Rembo:
      choice = maximize_at_index(posterior, config_.acquisition, w, 1, seed);
      break;
    case Method::Crembo:
      // Random-embedding step, then cross-embedding step.
      choice = maximize_at_index(posterior, config_.acquisition, w, ((n - config_.n_init) % 2) + 1, seed);
      break;
    case Method::SaCrembo:
      choice = maximize_over_augmented(posterior, config_.acquisition, w, config_.num_indices(), seed);
      break;
  }
  return make_suggestion(std::move(choice.point.x), choice.point.z);
}

void BoState::tell(const Eigen::Ref<const Eigen::VectorXd>& y, int z, double value) {
  if (done()) throw Error(ErrorCode::BudgetExhausted, "evaluation budget already spent");
  if (y.size() != config_.d || z < 1 || z > config_.num_indices()) {
    throw Error(ErrorCode::StaleState, "tell: (y, z) does not match this optimizer's dimensions");
  }
  if (!box_.contains_low(y)) throw Error(ErrorCode::StaleState, "tell: y lies outside the low-dimensional box");
  if (!std::isfinite(value)) throw Error(ErrorCode::InvalidConfig, "tell: objective value is not finite");

  Observation o;
  o.y_low = y;
  o.z = z;
  o.x_high = project_up(embeddings_[static_cast<std::size_t>(z - 1)], y, box_);
  o.value = value;
  o.iteration = iteration_for(static_cast<int>(history_.size()));
  history_.push_back(std::move(o));
}

nlohmann::json BoState::to_json() const {
  nlohmann::json embeddings = nlohmann::json::array();
  for (const auto& e : embeddings_) embeddings.push_back(crembo::to_json(e));
  nlohmann::json history = nlohmann::json::array();
  for (const auto& o : history_) history.push_back(crembo::to_json(o));
  nlohmann::json j = {{"version", kStateVersion},
                      {"config", crembo::to_json(config_)},
                      {"embeddings", embeddings},
                      {"history", history},
                      {"cached_fit_size", cached_fit_size_}};
  j["cached_hyperparameters"] = cached_hyper_ ? crembo::to_json(*cached_hyper_) : nlohmann::json(nullptr);
  return j;
}

BoState BoState::from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kStateVersion) {
      throw Error(ErrorCode::StaleState, "unsupported optimizer state version");
    }
    BoState state(run_config_from_json(j.at("config")));
    const auto& embeddings = j.at("embeddings");
    if (embeddings.size() != state.embeddings_.size()) {
      throw Error(ErrorCode::StaleState, "embedding count does not match config");
    }
    for (std::size_t k = 0; k < embeddings.size(); ++k) state.embeddings_[k] = embedding_from_json(embeddings[k]);
    for (const auto& o : j.at("history")) state.history_.push_back(observation_from_json(o));
    if (!j.at("cached_hyperparameters").is_null()) {
      state.cached_hyper_ = hyperparameters_from_json(j.at("cached_hyperparameters"));
    }
    state.cached_fit_size_ = j.at("cached_fit_size").get<int>();
    return state;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::SchemaError, std::string("optimizer state: ") + ex.what());
  }
}

std::map<int, int> RunResult::z_histogram() const {
  std::map<int, int> hist;
  for (int z = 1; z <= config.num_indices(); ++z) hist[z] = 0;
  for (const auto& o : history) ++hist[o.z];
  return hist;
}

RunResult run(const RunConfig& config, const Objective& objective) {
  const auto start = std::chrono::steady_clock::now();
  BoState state(config);
  while (!state.done()) {
    const Suggestion s = state.ask();
    state.tell(s, objective(s.x_high));
  }
  RunResult result;
  result.config = state.config();
  result.embeddings = state.embeddings();
  result.history = state.history();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : result.history) {
    if (o.value < best) {
      best = o.value;
      result.best_point = o;
    }
    result.best_value_trace.push_back(best);
  }
  result.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

RunResult run_rembo(const RunConfig& config, const Objective& objective) {
  if (config.method != Method::Rembo) throw Error(ErrorCode::InvalidConfig, "run_rembo needs method rembo");
  return run(config, objective);
}

RunResult run_crembo(const RunConfig& config, const Objective& objective) {
  if (config.method != Method::Crembo) throw Error(ErrorCode::InvalidConfig, "run_crembo needs method crembo");
  return run(config, objective);
}

RunResult run_sa_crembo(const RunConfig& config, const Objective& objective) {
  if (config.method != Method::SaCrembo) throw Error(ErrorCode::InvalidConfig, "run_sa_crembo needs method sa_crembo");
  return run(config, objective);
}

}  // namespace crembo
