#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "crembo/acquisition.hpp"
#include "crembo/embeddings.hpp"
#include "crembo/surrogate.hpp"

namespace crembo {

enum class Method { Rembo, Crembo, SaCrembo };

/// How cREMBO counts its random/cross steps. Paired: one outer iteration is
/// a random-embedding step followed by a cross-embedding step. Alternate:
/// every evaluation is its own iteration, alternating z = 1, 2.
enum class CrossMode { Paired, Alternate };

std::string_view to_string(Method m);
Method method_from_string(std::string_view name);
std::string_view to_string(CrossMode m);
CrossMode cross_mode_from_string(std::string_view name);

struct RunConfig {
  Method method = Method::SaCrembo;
  Eigen::Index big_d = 21;
  Eigen::Index d = 8;
  int k_embeddings = 1;      // SA-cREMBO only; cREMBO uses 2 and REMBO 1
  bool cross_pairs = false;  // SA-cREMBO: add orthogonalized companions as K+1..2K
  CrossMode cross_mode = CrossMode::Paired;
  int budget = 40;
  int n_init = 10;
  std::uint64_t seed = 0;
  double low_dim_half_width = 0.0;  // 0 selects sqrt(d)
  double high_dim_bound = 1.0;
  int full_refit_until = 50;  // refit hyperparameters at every step while n <= this
  int refit_interval = 5;     // afterwards, every this many new observations
  SurrogateConfig surrogate;
  AcquisitionConfig acquisition;
  std::string benchmark;

  int num_indices() const;
  double half_width() const;
  /// Surrogate settings with lengthscales scaled to the low-dimensional box.
  SurrogateConfig effective_surrogate() const;
  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Reads a run config; absent keys keep their defaults.
RunConfig run_config_from_json(const nlohmann::json& j);

struct Observation {
  Eigen::VectorXd y_low;
  int z = 1;
  Eigen::VectorXd x_high;  // the clamped point actually evaluated
  double value = 0.0;
  int iteration = 0;       // 0 for the initial design
};

struct Suggestion {
  Eigen::VectorXd y_low;
  int z = 1;
  Eigen::VectorXd x_high;
};

nlohmann::json to_json(const Observation& o);
Observation observation_from_json(const nlohmann::json& j);

/// Ask/tell optimizer state. Every decision is a deterministic function of
/// the config and the history, so a serialized state resumes identically.
class BoState {
 public:
  explicit BoState(RunConfig config);

  const RunConfig& config() const { return config_; }
  const std::vector<Embedding>& embeddings() const { return embeddings_; }
  const SearchBox& box() const { return box_; }
  const std::vector<Observation>& history() const { return history_; }
  bool done() const { return static_cast<int>(history_.size()) >= config_.budget; }

  /// Next point to evaluate. Repeated calls without a tell return the same point.
  Suggestion ask();

  /// Records an evaluation of embedding z at y. Any valid pair is accepted,
  /// including ones that were never asked for.
  void tell(const Eigen::Ref<const Eigen::VectorXd>& y, int z, double value);
  void tell(const Suggestion& s, double value) { tell(s.y_low, s.z, value); }

  /// Surrogate over the current history, refit according to the schedule.
  GpPosterior surrogate();

  nlohmann::json to_json() const;
  static BoState from_json(const nlohmann::json& j);

 private:
  Suggestion initial_design_point(int n) const;
  int iteration_for(int n) const;
  Suggestion make_suggestion(Eigen::VectorXd y, int z) const;

  RunConfig config_;
  std::vector<Embedding> embeddings_;
  SearchBox box_;
  std::vector<Observation> history_;
  std::optional<GpHyperparameters> cached_hyper_;
  int cached_fit_size_ = 0;
};

struct RunResult {
  RunConfig config;
  std::vector<Embedding> embeddings;
  std::vector<Observation> history;
  std::vector<double> best_value_trace;
  Observation best_point;
  double wall_time_seconds = 0.0;

  /// Evaluations per embedding index.
  std::map<int, int> z_histogram() const;
};

using Objective = std::function<double(const Eigen::VectorXd& x_high)>;

/// Runs the method named in `config` to its budget in ask/tell lock-step.
RunResult run(const RunConfig& config, const Objective& objective);
RunResult run_rembo(const RunConfig& config, const Objective& objective);
RunResult run_crembo(const RunConfig& config, const Objective& objective);
RunResult run_sa_crembo(const RunConfig& config, const Objective& objective);

}  // namespace crembo
