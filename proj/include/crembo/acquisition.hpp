#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "crembo/surrogate.hpp"

namespace crembo {

enum class AcquisitionFunction { ExpectedImprovement, Ucb };

std::string_view to_string(AcquisitionFunction f);
AcquisitionFunction acquisition_function_from_string(std::string_view name);

struct AcquisitionConfig {
  AcquisitionFunction function = AcquisitionFunction::ExpectedImprovement;
  double ucb_beta = 4.0;
  int restarts = 10;
  int local_steps = 40;
  int candidate_pool = 0;  // 0 selects 512 * d

  int pool_size(Eigen::Index d) const {
    return candidate_pool > 0 ? candidate_pool : static_cast<int>(512 * d);
  }
  void validate(Eigen::Index d) const;
};

/// Closed-form expected improvement for minimization. Zero variance gives
/// max(incumbent - mean, 0).
double expected_improvement(double mean, double variance, double incumbent_best);

/// Lower-confidence-bound score for minimization: -(mean - sqrt(beta) * sigma).
double ucb(double mean, double variance, double beta);

/// Score of a prediction under `cfg`, higher is better.
double acquisition_value(const AcquisitionConfig& cfg, const Prediction& p, double incumbent_best);

struct AcquisitionChoice {
  AugmentedPoint point;
  double value = 0.0;
  double best_pool_value = 0.0;  // best candidate before refinement
};

/// Maximizes the acquisition over [-w, w]^d for a fixed index z: a uniform
/// candidate pool, the top `restarts` candidates refined by a shrinking
/// coordinate pattern search.
AcquisitionChoice maximize_at_index(const GpPosterior& posterior, const AcquisitionConfig& cfg,
                                    double half_width, int z, std::uint64_t seed);

/// Exhaustive enumeration over z in 1..num_indices. Ties go to the smallest
/// z, then the lexicographically smallest x.
AcquisitionChoice maximize_over_augmented(const GpPosterior& posterior, const AcquisitionConfig& cfg,
                                          double half_width, int num_indices, std::uint64_t seed);

}  // namespace crembo
