#pragma once

// Test-only helpers: random generators and brute-force oracles that share
// no code path with the library's factorized routines.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "crembo/kernels.hpp"
#include "crembo/surrogate.hpp"

namespace crembo::test {

inline Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline Eigen::VectorXd uniform(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

/// Random augmented points in [-1, 1]^d with z in 1..k.
inline std::vector<AugmentedPoint> random_points(std::mt19937_64& rng, int n, Eigen::Index d, int k) {
  std::uniform_int_distribution<int> pick(1, k);
  std::vector<AugmentedPoint> pts;
  for (int i = 0; i < n; ++i) pts.push_back({uniform(rng, d, -1.0, 1.0), pick(rng)});
  return pts;
}

/// Random hyperparameters for the given index variant.
inline GpHyperparameters random_hyperparameters(std::mt19937_64& rng, Eigen::Index d, int k, IndexVariant variant,
                                                ContinuousFamily family) {
  GpHyperparameters h;
  h.continuous.family = family;
  h.continuous.signal_variance = uniform(rng, 1, 0.5, 2.0)(0);
  h.continuous.lengthscales = uniform(rng, d, 0.3, 1.5);
  h.index.variant = variant;
  h.index.num_indices = k;
  h.index.lambda = uniform(rng, 1, 0.2, 2.0)(0);
  if (variant == IndexVariant::LearnedLatent) h.index.latents = gaussian(rng, k, 2);
  h.noise_variance = uniform(rng, 1, 1e-4, 1e-2)(0);
  return h;
}

/// Kernel written out from its textbook definition, independent of kernels.cpp.
inline double reference_kernel(const GpHyperparameters& h, const AugmentedPoint& a, const AugmentedPoint& b) {
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < a.x.size(); ++i) {
    r2 += std::pow((a.x(i) - b.x(i)) / h.continuous.lengthscales(i), 2);
  }
  const double r = std::sqrt(r2);
  const double kx = h.continuous.family == ContinuousFamily::SquaredExponential
                        ? std::exp(-r2 / 2.0)
                        : (1.0 + std::sqrt(5.0) * r + 5.0 * r2 / 3.0) * std::exp(-std::sqrt(5.0) * r);
  double kz = 0.0;
  switch (h.index.variant) {
    case IndexVariant::Delta: kz = a.z == b.z ? 1.0 : 0.0; break;
    case IndexVariant::SmoothExponential: kz = std::exp(-std::pow(h.index.lambda * (a.z - b.z), 2)); break;
    case IndexVariant::LearnedLatent:
      kz = std::exp(-(h.index.latents.row(a.z - 1) - h.index.latents.row(b.z - 1)).squaredNorm() / 2.0);
      break;
  }
  return h.continuous.signal_variance * kx * kz;
}

struct DensePrediction {
  double mean;
  double variance;
};

/// Predictive mean/variance through an explicit inverse of (K + σ²I), with
/// targets used as given (no standardization).
inline DensePrediction dense_inverse_predict(const GpHyperparameters& h, const std::vector<AugmentedPoint>& pts,
                                             const Eigen::VectorXd& y, const AugmentedPoint& q) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd k(n, n);
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ks(i) = reference_kernel(h, q, pts[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < n; ++j) {
      k(i, j) = reference_kernel(h, pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
    }
  }
  k.diagonal().array() += h.noise_variance;
  const Eigen::MatrixXd inv = k.fullPivLu().inverse();
  return {ks.dot(inv * y), reference_kernel(h, q, q) - ks.dot(inv * ks)};
}

}  // namespace crembo::test
