#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace crembo {

enum class ContinuousFamily { Matern52, SquaredExponential };
enum class IndexVariant { Delta, SmoothExponential, LearnedLatent };

std::string_view to_string(ContinuousFamily family);
std::string_view to_string(IndexVariant variant);
ContinuousFamily continuous_family_from_string(std::string_view name);
IndexVariant index_variant_from_string(std::string_view name);

/// ARD kernel over the low-dimensional point.
struct ContinuousKernelParams {
  double signal_variance = 1.0;
  Eigen::VectorXd lengthscales;
  ContinuousFamily family = ContinuousFamily::Matern52;
};

/// Kernel over the embedding index z in {1..num_indices}.
///  Delta:             1 if z1 == z2 else 0
///  SmoothExponential: exp(-lambda^2 (z1 - z2)^2)
///  LearnedLatent:     exp(-|phi(z1) - phi(z2)|^2 / 2), phi(z) = latents.row(z - 1)
struct IndexKernelParams {
  IndexVariant variant = IndexVariant::SmoothExponential;
  int num_indices = 1;
  double lambda = 1.0;
  Eigen::MatrixXd latents;  // num_indices x r, LearnedLatent only
};

/// Point (x, z) of the joint domain; z is 1-based.
struct AugmentedPoint {
  Eigen::VectorXd x;
  int z = 1;
};

double k_continuous(const ContinuousKernelParams& p, const Eigen::Ref<const Eigen::VectorXd>& x1,
                    const Eigen::Ref<const Eigen::VectorXd>& x2);
double k_index(const IndexKernelParams& p, int z1, int z2);
double k_product(const ContinuousKernelParams& cp, const IndexKernelParams& ip,
                 const AugmentedPoint& a, const AugmentedPoint& b);

/// num_indices x num_indices table of k_index values.
Eigen::MatrixXd index_kernel_matrix(const IndexKernelParams& p);

/// Pairwise k_product values, symmetric by construction.
Eigen::MatrixXd gram(const ContinuousKernelParams& cp, const IndexKernelParams& ip,
                     std::span<const AugmentedPoint> points);

/// Column-major batch of augmented points: row i of `x` pairs with `z[i]`.
struct AugmentedBatch {
  Eigen::MatrixXd x;  // n x d
  Eigen::VectorXi z;  // n, 1-based

  Eigen::Index size() const { return x.rows(); }
  static AugmentedBatch from_points(std::span<const AugmentedPoint> points);
  AugmentedPoint point(Eigen::Index i) const { return {x.row(i).transpose(), z(i)}; }
};

/// K(a_i, b_j) for every pair of rows; same values as k_product.
Eigen::MatrixXd cross_covariance(const ContinuousKernelParams& cp, const IndexKernelParams& ip,
                                 const AugmentedBatch& a, const AugmentedBatch& b);

}  // namespace crembo
