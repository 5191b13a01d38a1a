#include "crembo/benchmarks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <regex>
#include <vector>

#include "crembo/error.hpp"
#include "crembo/numerics.hpp"
#include "crembo/rng.hpp"

namespace crembo {

namespace {

constexpr double kDomainTolerance = 1e-9;

// Canonical Hartmann-6 tables.
constexpr std::array<double, 4> kHartmannAlpha = {1.0, 1.2, 3.0, 3.2};
constexpr std::array<std::array<double, 6>, 4> kHartmannA = {{
    {10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
    {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
    {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
    {17.0, 8.0, 0.05, 10.0, 0.1, 14.0},
}};
constexpr std::array<std::array<double, 6>, 4> kHartmannP = {{
    {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
    {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
    {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
    {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381},
}};
constexpr std::array<double, 6> kHartmannArgmin = {0.20168952, 0.15001069, 0.47687398,
                                                   0.27533243, 0.31165162, 0.65730054};

void check_domain(const Eigen::Ref<const Eigen::VectorXd>& v, double lo, double hi, const char* name) {
  const double slack = kDomainTolerance * std::max(1.0, hi - lo);
  if (!v.allFinite() || (v.array() < lo - slack).any() || (v.array() > hi + slack).any()) {
    throw Error(ErrorCode::OutOfDomain, std::string(name) + ": argument outside native domain");
  }
}

}  // namespace

std::string_view to_string(BaseFunction base) {
  switch (base) {
    case BaseFunction::StyblinskiTang: return "styblinski_tang";
    case BaseFunction::Hartmann6: return "hartmann6";
    case BaseFunction::Sphere: return "sphere";
  }
  return "unknown";
}

double styblinski_tang_term(double v) {
  const double v2 = v * v;
  return 0.5 * (v2 * v2 - 16.0 * v2 + 5.0 * v);
}

double styblinski_tang(const Eigen::Ref<const Eigen::VectorXd>& v) {
  check_domain(v, -5.0, 5.0, "styblinski_tang");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) sum += styblinski_tang_term(v(i));
  return sum;
}

double hartmann6(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() != 6) throw Error(ErrorCode::DimensionMismatch, "hartmann6 takes 6 coordinates");
  check_domain(v, 0.0, 1.0, "hartmann6");
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
      const double t = v(static_cast<Eigen::Index>(j)) - kHartmannP[i][j];
      inner += kHartmannA[i][j] * t * t;
    }
    sum += kHartmannAlpha[i] * std::exp(-inner);
  }
  return -sum;
}

double sphere(const Eigen::Ref<const Eigen::VectorXd>& v) {
  check_domain(v, -5.0, 5.0, "sphere");
  return v.squaredNorm();
}

double evaluate_base(BaseFunction base, const Eigen::Ref<const Eigen::VectorXd>& v) {
  switch (base) {
    case BaseFunction::StyblinskiTang: return styblinski_tang(v);
    case BaseFunction::Hartmann6: return hartmann6(v);
    case BaseFunction::Sphere: return sphere(v);
  }
  return 0.0;
}

Eigen::VectorXd EmbeddedObjective::to_native(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  return native_lo.array() + (u.array() + high_bound) / (2.0 * high_bound) * (native_hi - native_lo).array();
}

Eigen::VectorXd EmbeddedObjective::from_native(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  return ((v - native_lo).array() / (native_hi - native_lo).array()) * (2.0 * high_bound) - high_bound;
}

std::optional<Eigen::VectorXd> EmbeddedObjective::optimizer_in_subspace() const {
  if (!known_native_optimizer) return std::nullopt;
  return Eigen::VectorXd(basis * from_native(*known_native_optimizer));
}

double evaluate_embedded(const EmbeddedObjective& o, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != o.big_d()) {
    throw Error(ErrorCode::DimensionMismatch, "evaluate_embedded: point has length " + std::to_string(x.size()) +
                                                  ", objective expects " + std::to_string(o.big_d()));
  }
  Eigen::VectorXd u = o.basis.transpose() * x;
  if (o.rotated) u = u.cwiseMax(-o.high_bound).cwiseMin(o.high_bound);
  return evaluate_base(o.base, o.to_native(u));
}

EmbeddedObjective make_embedded_objective(BaseFunction base, Eigen::Index effective_dim, Eigen::Index big_d,
                                          std::uint64_t seed, bool rotated) {
  if (base == BaseFunction::Hartmann6 && effective_dim != 6) {
    throw Error(ErrorCode::InvalidDimensions, "hartmann6 has effective dimension 6");
  }
  if (effective_dim < 1 || big_d < effective_dim) {
    throw Error(ErrorCode::InvalidDimensions, "need D >= d_e >= 1");
  }
  EmbeddedObjective o;
  o.base = base;
  o.rotated = rotated;
  Rng rng(derive_seed(seed, {kTagObjective}));
  if (rotated) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd g(big_d, effective_dim);
    for (Eigen::Index i = 0; i < big_d; ++i)
      for (Eigen::Index j = 0; j < effective_dim; ++j) g(i, j) = normal(rng);
    o.basis = qr_orthonormalize(g);
  } else {
    std::vector<Eigen::Index> coords(static_cast<std::size_t>(big_d));
    std::iota(coords.begin(), coords.end(), Eigen::Index{0});
    // Partial Fisher–Yates over the coordinate list.
    for (Eigen::Index i = 0; i < effective_dim; ++i) {
      std::uniform_int_distribution<Eigen::Index> pick(i, big_d - 1);
      std::swap(coords[static_cast<std::size_t>(i)], coords[static_cast<std::size_t>(pick(rng))]);
    }
    o.basis = Eigen::MatrixXd::Zero(big_d, effective_dim);
    for (Eigen::Index j = 0; j < effective_dim; ++j) o.basis(coords[static_cast<std::size_t>(j)], j) = 1.0;
  }

  switch (base) {
    case BaseFunction::StyblinskiTang:
      o.native_lo = Eigen::VectorXd::Constant(effective_dim, -5.0);
      o.native_hi = Eigen::VectorXd::Constant(effective_dim, 5.0);
      o.known_native_optimizer = Eigen::VectorXd::Constant(effective_dim, kStyblinskiTangArgmin);
      o.known_optimum_value = static_cast<double>(effective_dim) * styblinski_tang_term(kStyblinskiTangArgmin);
      break;
    case BaseFunction::Hartmann6:
      o.native_lo = Eigen::VectorXd::Zero(6);
      o.native_hi = Eigen::VectorXd::Ones(6);
      o.known_native_optimizer = Eigen::Map<const Eigen::VectorXd>(kHartmannArgmin.data(), 6);
      o.known_optimum_value = kHartmann6Minimum;
      break;
    case BaseFunction::Sphere:
      o.native_lo = Eigen::VectorXd::Constant(effective_dim, -5.0);
      o.native_hi = Eigen::VectorXd::Constant(effective_dim, 5.0);
      o.known_native_optimizer = Eigen::VectorXd::Zero(effective_dim);
      o.known_optimum_value = 0.0;
      break;
  }
  return o;
}

BenchmarkId parse_benchmark_id(std::string_view id) {
  static const std::regex pattern(R"(^(styblinski_tang|sphere)_d(\d+)_D(\d+)(_rotated)?$|^hartmann6_D(\d+)(_rotated)?$)");
  std::cmatch m;
  if (!std::regex_match(id.begin(), id.end(), m, pattern)) {
    throw Error(ErrorCode::InvalidConfig, "unknown benchmark id '" + std::string(id) + "'");
  }
  BenchmarkId out;
  out.name = std::string(id);
  if (m[1].matched) {
    out.base = m[1].str() == "sphere" ? BaseFunction::Sphere : BaseFunction::StyblinskiTang;
    out.effective_dim = std::stol(m[2].str());
    out.big_d = std::stol(m[3].str());
    out.rotated = m[4].matched;
  } else {
    out.base = BaseFunction::Hartmann6;
    out.effective_dim = 6;
    out.big_d = std::stol(m[5].str());
    out.rotated = m[6].matched;
  }
  if (out.effective_dim < 1 || out.big_d < out.effective_dim) {
    throw Error(ErrorCode::InvalidConfig, "benchmark '" + out.name + "' needs D >= d_e >= 1");
  }
  return out;
}

EmbeddedObjective make_benchmark(std::string_view id, std::uint64_t seed) {
  const auto parsed = parse_benchmark_id(id);
  return make_embedded_objective(parsed.base, parsed.effective_dim, parsed.big_d, seed, parsed.rotated);
}

}  // namespace crembo
