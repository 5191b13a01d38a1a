#include "crembo/embeddings.hpp"

#include <cmath>
#include <random>
#include <string>

#include "crembo/error.hpp"
#include "crembo/numerics.hpp"
#include "crembo/rng.hpp"

namespace crembo {

namespace {
constexpr double kBoxTolerance = 1e-12;
}

std::string_view to_string(EmbeddingKind kind) {
  return kind == EmbeddingKind::Random ? "random" : "orthogonalized";
}

EmbeddingKind embedding_kind_from_string(std::string_view name) {
  if (name == "random") return EmbeddingKind::Random;
  if (name == "orthogonalized") return EmbeddingKind::Orthogonalized;
  throw Error(ErrorCode::InvalidConfig, "unknown embedding kind '" + std::string(name) + "'");
}

SearchBox SearchBox::centered(Eigen::Index big_d, double half_width, double bound) {
  if (!(half_width > 0.0) || !(bound > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "search box bounds must be positive");
  }
  SearchBox box;
  box.low_dim_half_width = half_width;
  box.high_lo = Eigen::VectorXd::Constant(big_d, -bound);
  box.high_hi = Eigen::VectorXd::Constant(big_d, bound);
  return box;
}

bool SearchBox::contains_low(const Eigen::Ref<const Eigen::VectorXd>& y) const {
  const double limit = low_dim_half_width * (1.0 + kBoxTolerance);
  return y.allFinite() && (y.array().abs() <= limit).all();
}

bool SearchBox::contains_high(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return x.size() == high_lo.size() && (x.array() >= high_lo.array()).all() &&
         (x.array() <= high_hi.array()).all();
}

Embedding sample_embedding(std::uint64_t seed, Eigen::Index big_d, Eigen::Index d) {
  if (d < 1 || big_d < d) {
    throw Error(ErrorCode::InvalidDimensions,
                "need D >= d >= 1, got D=" + std::to_string(big_d) + " d=" + std::to_string(d));
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Embedding e;
  e.a.resize(big_d, d);
  // Fill row-major so the draw order matches the serialized layout.
  for (Eigen::Index i = 0; i < big_d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) e.a(i, j) = normal(rng);
  e.kind = EmbeddingKind::Random;
  return e;
}

Embedding orthogonalize(const Embedding& e) {
  if (e.kind != EmbeddingKind::Random) {
    throw Error(ErrorCode::InvalidConfig, "orthogonalize expects a random embedding");
  }
  return Embedding{qr_orthonormalize(e.a), EmbeddingKind::Orthogonalized};
}

Eigen::VectorXd project_up_unclamped(const Embedding& e, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (y.size() != e.d()) {
    throw Error(ErrorCode::DimensionMismatch, "project_up: point has length " +
                                                  std::to_string(y.size()) + ", embedding expects " +
                                                  std::to_string(e.d()));
  }
  return e.a * y;
}

Eigen::VectorXd project_up(const Embedding& e, const Eigen::Ref<const Eigen::VectorXd>& y,
                           const SearchBox& box) {
  if (box.high_lo.size() != e.big_d() || box.high_hi.size() != e.big_d()) {
    throw Error(ErrorCode::DimensionMismatch, "project_up: box dimension differs from embedding");
  }
  if (y.size() == e.d() && !box.contains_low(y)) {
    throw Error(ErrorCode::OutOfSearchBox, "project_up: low-dimensional point outside [-w, w]^d");
  }
  Eigen::VectorXd x = project_up_unclamped(e, y);
  return x.cwiseMax(box.high_lo).cwiseMin(box.high_hi);
}

double default_low_dim_half_width(Eigen::Index d) {
  if (d < 1) throw Error(ErrorCode::InvalidDimensions, "d must be >= 1");
  return std::sqrt(static_cast<double>(d));
}

nlohmann::json to_json(const Embedding& e) {
  std::vector<double> entries;
  entries.reserve(static_cast<std::size_t>(e.a.size()));
  for (Eigen::Index i = 0; i < e.a.rows(); ++i)
    for (Eigen::Index j = 0; j < e.a.cols(); ++j) entries.push_back(e.a(i, j));
  return nlohmann::json{{"big_d", e.big_d()},
                        {"d", e.d()},
                        {"kind", std::string(to_string(e.kind))},
                        {"entries", entries}};
}

Embedding embedding_from_json(const nlohmann::json& j) {
  try {
    const auto big_d = j.at("big_d").get<Eigen::Index>();
    const auto d = j.at("d").get<Eigen::Index>();
    const auto entries = j.at("entries").get<std::vector<double>>();
    if (d < 1 || big_d < d || static_cast<Eigen::Index>(entries.size()) != big_d * d) {
      throw Error(ErrorCode::InvalidDimensions, "embedding document has inconsistent shape");
    }
    Embedding e;
    e.kind = embedding_kind_from_string(j.at("kind").get<std::string>());
    e.a.resize(big_d, d);
    for (Eigen::Index i = 0; i < big_d; ++i)
      for (Eigen::Index k = 0; k < d; ++k) e.a(i, k) = entries[static_cast<std::size_t>(i * d + k)];
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::SchemaError, std::string("embedding document: ") + ex.what());
  }
}

}  // namespace crembo
