#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>
#include <json.hpp>

namespace crembo {

enum class EmbeddingKind { Random, Orthogonalized };

std::string_view to_string(EmbeddingKind kind);
EmbeddingKind embedding_kind_from_string(std::string_view name);

/// Linear map x = A y from the low-dimensional search space R^d into R^D.
struct Embedding {
  Eigen::MatrixXd a;  // D x d
  EmbeddingKind kind = EmbeddingKind::Random;

  Eigen::Index big_d() const { return a.rows(); }
  Eigen::Index d() const { return a.cols(); }
};

/// Low-dimensional box [-w, w]^d paired with the high-dimensional box it maps into.
struct SearchBox {
  double low_dim_half_width = 1.0;
  Eigen::VectorXd high_lo;
  Eigen::VectorXd high_hi;

  /// [-w, w]^d together with [-bound, bound]^D.
  static SearchBox centered(Eigen::Index big_d, double half_width, double bound = 1.0);

  bool contains_low(const Eigen::Ref<const Eigen::VectorXd>& y) const;
  bool contains_high(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// D x d matrix of i.i.d. standard normal entries, deterministic in `seed`.
Embedding sample_embedding(std::uint64_t seed, Eigen::Index big_d, Eigen::Index d);

/// QR-orthonormalized companion with the same column span.
Embedding orthogonalize(const Embedding& e);

/// clamp(A y) into the high-dimensional box. Throws OutOfSearchBox when y
/// leaves [-w, w]^d.
Eigen::VectorXd project_up(const Embedding& e, const Eigen::Ref<const Eigen::VectorXd>& y,
                           const SearchBox& box);

/// A y without clamping.
Eigen::VectorXd project_up_unclamped(const Embedding& e, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Conventional low-dimensional half-width, sqrt(d).
double default_low_dim_half_width(Eigen::Index d);

nlohmann::json to_json(const Embedding& e);
Embedding embedding_from_json(const nlohmann::json& j);

}  // namespace crembo
