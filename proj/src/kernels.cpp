#include "crembo/kernels.hpp"

#include <cmath>
#include <string>

#include "crembo/error.hpp"

namespace crembo {

namespace {

const double kSqrt5 = std::sqrt(5.0);

// r2 is the squared lengthscale-scaled distance.
inline double continuous_from_r2(ContinuousFamily family, double signal_variance, double r2) {
  if (family == ContinuousFamily::SquaredExponential) {
    return signal_variance * std::exp(-0.5 * r2);
  }
  const double r = std::sqrt(r2);
  return signal_variance * (1.0 + kSqrt5 * r + 5.0 / 3.0 * r2) * std::exp(-kSqrt5 * r);
}

void check_index(const IndexKernelParams& p, int z) {
  if (z < 1 || z > p.num_indices) {
    throw Error(ErrorCode::IndexOutOfRange, "embedding index " + std::to_string(z) +
                                                " outside 1.." + std::to_string(p.num_indices));
  }
}

void check_params(const IndexKernelParams& p) {
  if (p.num_indices < 1) throw Error(ErrorCode::InvalidConfig, "index kernel needs K >= 1");
  if (p.variant == IndexVariant::SmoothExponential && !std::isfinite(p.lambda)) {
    throw Error(ErrorCode::InvalidConfig, "smooth exponential index kernel needs a finite lambda");
  }
  if (p.variant == IndexVariant::LearnedLatent &&
      (p.latents.rows() != p.num_indices || p.latents.cols() < 1)) {
    throw Error(ErrorCode::InvalidConfig, "learned latent index kernel needs K latent rows");
  }
}

double k_index_unchecked(const IndexKernelParams& p, int z1, int z2) {
  if (z1 == z2) return 1.0;
  switch (p.variant) {
    case IndexVariant::Delta:
      return 0.0;
    case IndexVariant::SmoothExponential: {
      const double dz = static_cast<double>(z1 - z2);
      return std::exp(-p.lambda * p.lambda * dz * dz);
    }
    case IndexVariant::LearnedLatent:
      return std::exp(-0.5 * (p.latents.row(z1 - 1) - p.latents.row(z2 - 1)).squaredNorm());
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(ContinuousFamily family) {
  return family == ContinuousFamily::Matern52 ? "matern52" : "squared_exponential";
}

std::string_view to_string(IndexVariant variant) {
  switch (variant) {
    case IndexVariant::Delta: return "delta";
    case IndexVariant::SmoothExponential: return "smooth_exponential";
    case IndexVariant::LearnedLatent: return "learned_latent";
  }
  return "unknown";
}

ContinuousFamily continuous_family_from_string(std::string_view name) {
  if (name == "matern52") return ContinuousFamily::Matern52;
  if (name == "squared_exponential" || name == "se") return ContinuousFamily::SquaredExponential;
  throw Error(ErrorCode::InvalidConfig, "unknown kernel family '" + std::string(name) + "'");
}

IndexVariant index_variant_from_string(std::string_view name) {
  if (name == "delta") return IndexVariant::Delta;
  if (name == "smooth_exponential") return IndexVariant::SmoothExponential;
  if (name == "learned_latent") return IndexVariant::LearnedLatent;
  throw Error(ErrorCode::InvalidConfig, "unknown index kernel '" + std::string(name) + "'");
}

double k_continuous(const ContinuousKernelParams& p, const Eigen::Ref<const Eigen::VectorXd>& x1,
                    const Eigen::Ref<const Eigen::VectorXd>& x2) {
  const Eigen::Index d = p.lengthscales.size();
  if (x1.size() != d || x2.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "k_continuous: inputs must have length " + std::to_string(d));
  }
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double t = (x1(i) - x2(i)) / p.lengthscales(i);
    r2 += t * t;
  }
  return continuous_from_r2(p.family, p.signal_variance, r2);
}

double k_index(const IndexKernelParams& p, int z1, int z2) {
  check_params(p);
  check_index(p, z1);
  check_index(p, z2);
  return k_index_unchecked(p, z1, z2);
}

double k_product(const ContinuousKernelParams& cp, const IndexKernelParams& ip,
                 const AugmentedPoint& a, const AugmentedPoint& b) {
  return k_continuous(cp, a.x, b.x) * k_index(ip, a.z, b.z);
}

Eigen::MatrixXd index_kernel_matrix(const IndexKernelParams& p) {
  check_params(p);
  Eigen::MatrixXd table(p.num_indices, p.num_indices);
  for (int i = 1; i <= p.num_indices; ++i)
    for (int j = 1; j <= p.num_indices; ++j) table(i - 1, j - 1) = k_index_unchecked(p, i, j);
  return table;
}

AugmentedBatch AugmentedBatch::from_points(std::span<const AugmentedPoint> points) {
  AugmentedBatch batch;
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  const Eigen::Index d = n > 0 ? points[0].x.size() : 0;
  batch.x.resize(n, d);
  batch.z.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    if (p.x.size() != d) {
      throw Error(ErrorCode::DimensionMismatch, "augmented points have inconsistent dimensions");
    }
    batch.x.row(i) = p.x.transpose();
    batch.z(i) = p.z;
  }
  return batch;
}

Eigen::MatrixXd cross_covariance(const ContinuousKernelParams& cp, const IndexKernelParams& ip,
                                 const AugmentedBatch& a, const AugmentedBatch& b) {
  const Eigen::Index d = cp.lengthscales.size();
  if ((a.size() > 0 && a.x.cols() != d) || (b.size() > 0 && b.x.cols() != d)) {
    throw Error(ErrorCode::DimensionMismatch, "cross_covariance: inputs must have " +
                                                  std::to_string(d) + " columns");
  }
  const Eigen::MatrixXd table = index_kernel_matrix(ip);
  for (Eigen::Index i = 0; i < a.size(); ++i) check_index(ip, a.z(i));
  for (Eigen::Index j = 0; j < b.size(); ++j) check_index(ip, b.z(j));

  // Scale once, one column per point; distances then accumulate in the same
  // order as k_continuous.
  const Eigen::MatrixXd sa = (a.x.array().rowwise() / cp.lengthscales.transpose().array()).transpose();
  const Eigen::MatrixXd sb = (b.x.array().rowwise() / cp.lengthscales.transpose().array()).transpose();
  const bool symmetric = &a == &b;
  Eigen::MatrixXd out(a.size(), b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const double* xb = sb.col(j).data();
    // Same batch on both sides: fill the upper triangle and mirror it.
    const Eigen::Index last = symmetric ? j + 1 : a.size();
    for (Eigen::Index i = 0; i < last; ++i) {
      const double kz = table(a.z(i) - 1, b.z(j) - 1);
      double v = 0.0;
      if (kz != 0.0) {
        const double* xa = sa.col(i).data();
        double r2 = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
          const double t = xa[k] - xb[k];
          r2 += t * t;
        }
        v = continuous_from_r2(cp.family, cp.signal_variance, r2) * kz;
      }
      out(i, j) = v;
      if (symmetric) out(j, i) = v;
    }
  }
  return out;
}

Eigen::MatrixXd gram(const ContinuousKernelParams& cp, const IndexKernelParams& ip,
                     std::span<const AugmentedPoint> points) {
  if (points.empty()) throw Error(ErrorCode::DimensionMismatch, "gram: empty point list");
  const auto batch = AugmentedBatch::from_points(points);
  return cross_covariance(cp, ip, batch, batch);
}

}  // namespace crembo
