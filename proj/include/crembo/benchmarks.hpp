#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace crembo {

enum class BaseFunction { StyblinskiTang, Hartmann6, Sphere };

std::string_view to_string(BaseFunction base);

/// 1/2 Σ (v_i^4 - 16 v_i^2 + 5 v_i) on [-5, 5]^n.
double styblinski_tang(const Eigen::Ref<const Eigen::VectorXd>& v);
/// Single-coordinate term of styblinski_tang.
double styblinski_tang_term(double v);
/// Hartmann-6 on [0, 1]^6 with the canonical constant tables.
double hartmann6(const Eigen::Ref<const Eigen::VectorXd>& v);
/// Σ v_i^2 on [-5, 5]^n.
double sphere(const Eigen::Ref<const Eigen::VectorXd>& v);

/// Minimizing coordinate of styblinski_tang_term (root of 2v^3 - 16v + 2.5).
inline constexpr double kStyblinskiTangArgmin = -2.903534027771178;
inline constexpr double kHartmann6Minimum = -3.32236801141551;

/// Objective on R^D that depends only on Φᵀx, with Φ a D x d_e orthonormal
/// basis. Each coordinate of Φᵀx in [-bound, bound] maps affinely onto the
/// base function's native domain.
struct EmbeddedObjective {
  BaseFunction base = BaseFunction::Sphere;
  Eigen::MatrixXd basis;  // D x d_e
  bool rotated = false;   // random orthonormal basis instead of coordinate axes
  double high_bound = 1.0;
  Eigen::VectorXd native_lo, native_hi;
  std::optional<double> known_optimum_value;
  std::optional<Eigen::VectorXd> known_native_optimizer;

  Eigen::Index big_d() const { return basis.rows(); }
  Eigen::Index effective_dim() const { return basis.cols(); }

  /// Native-domain image of effective coordinates u in [-bound, bound]^d_e.
  Eigen::VectorXd to_native(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  Eigen::VectorXd from_native(const Eigen::Ref<const Eigen::VectorXd>& v) const;

  /// x*_⊤ = Φ c for the known optimizer, when available.
  std::optional<Eigen::VectorXd> optimizer_in_subspace() const;
};

/// Base function evaluated at Φᵀx. In rotated mode Φᵀx is clipped to the box
/// first; otherwise coordinates outside it raise OutOfDomain.
double evaluate_embedded(const EmbeddedObjective& o, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Base function value at native point v.
double evaluate_base(BaseFunction base, const Eigen::Ref<const Eigen::VectorXd>& v);

/// Builds an objective whose effective coordinates are a seeded random subset
/// of the D axes (or a random orthonormal basis when `rotated`).
EmbeddedObjective make_embedded_objective(BaseFunction base, Eigen::Index effective_dim, Eigen::Index big_d,
                                          std::uint64_t seed, bool rotated = false);

/// Parsed registry id: "styblinski_tang_d8_D21", "hartmann6_D21", "sphere_d4_D50",
/// optionally suffixed with "_rotated".
struct BenchmarkId {
  BaseFunction base = BaseFunction::Sphere;
  Eigen::Index effective_dim = 0;
  Eigen::Index big_d = 0;
  bool rotated = false;
  std::string name;
};

BenchmarkId parse_benchmark_id(std::string_view id);
EmbeddedObjective make_benchmark(std::string_view id, std::uint64_t seed);

}  // namespace crembo
