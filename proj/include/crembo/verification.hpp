#pragma once

// Monte-Carlo checks of the random-embedding guarantees: rank preservation
// of ΦᵀA, and recovery of the subspace optimizer through y* with ΦᵀA y* = c.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "crembo/benchmarks.hpp"
#include "crembo/embeddings.hpp"

namespace crembo {

struct RankReport {
  Eigen::Index big_d = 0, d = 0, effective_dim = 0;
  int trials = 0;
  int full_rank_trials = 0;
  double fraction() const { return trials > 0 ? static_cast<double>(full_rank_trials) / trials : 0.0; }
};

/// Per trial: random orthonormal Φ (D x d_e) and Gaussian A (D x d); counts
/// how often rank(ΦᵀA) == d_e at relative tolerance 1e-10.
RankReport verify_rank_preservation(Eigen::Index big_d, Eigen::Index d, Eigen::Index effective_dim, int trials,
                                    std::uint64_t seed);

/// ‖y*‖ against two readings of the norm bound for one ε.
struct NormBoundCheck {
  double epsilon = 0.0;
  double bound_over_epsilon = 0.0;  // √d_e ‖x*_⊤‖ / ε
  bool holds_over_epsilon = false;
  double bound_times_epsilon = 0.0;  // √d_e ε ‖x*_⊤‖
  bool holds_times_epsilon = false;
};

struct RecoveryReport {
  Eigen::VectorXd y_star;
  double recovery_error = 0.0;  // |f(A y*) - f(x*_⊤)|, no clamping
  double subspace_residual = 0.0;  // ‖ΦᵀA y* - c‖
  double y_norm = 0.0;
  double x_top_norm = 0.0;
  std::vector<NormBoundCheck> bounds;
};

/// Solves (ΦᵀA) y = c in the least-squares (minimum-norm) sense where
/// x*_⊤ = Φc, then compares f(A y*) with f(x*_⊤). Throws RankDeficient if
/// ΦᵀA is rank deficient.
RecoveryReport verify_optimum_recovery(const EmbeddedObjective& o, const Embedding& e,
                                       const std::vector<double>& epsilons = {0.1, 0.5});

struct RecoverySweep {
  std::string benchmark;
  Eigen::Index d = 0;
  int seeds = 0;
  double tolerance = 1e-6;
  double max_recovery_error = 0.0;
  std::vector<double> y_norms;
  std::vector<double> epsilons;
  std::vector<double> holds_over_epsilon_fraction;
  std::vector<double> holds_times_epsilon_fraction;
  bool passed() const { return max_recovery_error < tolerance; }
};

/// Runs verify_optimum_recovery on `seeds` benchmark instances, each with its
/// own Gaussian embedding. `d` of 0 uses the benchmark's effective dimension.
RecoverySweep verify_recovery_sweep(const std::string& benchmark, Eigen::Index d, int seeds, std::uint64_t first_seed,
                                    double tolerance = 1e-6);

nlohmann::json to_json(const RankReport& r);
nlohmann::json to_json(const RecoverySweep& r);

}  // namespace crembo
