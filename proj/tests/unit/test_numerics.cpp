#include <doctest.h>

#include <cmath>
#include <random>

#include "crembo/error.hpp"
#include "crembo/numerics.hpp"
#include "support.hpp"

using namespace crembo;

TEST_CASE("cholesky of the identity needs no jitter") {
  const auto f = cholesky(Eigen::MatrixXd::Identity(3, 3), 0.0);
  CHECK(f.jitter_used == 0.0);
  CHECK(f.lower.isApprox(Eigen::MatrixXd::Identity(3, 3)));
}

TEST_CASE("cholesky of [[4,2],[2,3]]") {
  Eigen::Matrix2d m;
  m << 4, 2, 2, 3;
  const auto f = cholesky(m, 0.0);
  CHECK(f.lower(0, 0) == doctest::Approx(2.0));
  CHECK(f.lower(0, 1) == 0.0);
  CHECK(f.lower(1, 0) == doctest::Approx(1.0));
  CHECK(f.lower(1, 1) == doctest::Approx(std::sqrt(2.0)));
  CHECK((f.lower * f.lower.transpose() - m).norm() / m.norm() < 1e-12);
}

TEST_CASE("singular matrix succeeds after jitter escalation") {
  Eigen::Matrix2d m;
  m << 1, 1, 1, 1;
  const auto f = cholesky(m, 1e-10);
  CHECK(f.jitter_used > 0.0);
  CHECK(f.jitter_used <= 1e-2);
  const Eigen::MatrixXd shifted = m + f.jitter_used * Eigen::MatrixXd::Identity(2, 2);
  CHECK((f.lower * f.lower.transpose() - shifted).norm() / m.norm() <= 1e-8);
  CHECK((f.lower.diagonal().array() > 0).all());
}

TEST_CASE("cholesky rejects indefinite matrices once the jitter cap is hit") {
  Eigen::Matrix2d m;
  m << 1, 0, 0, -1;
  CHECK_THROWS_AS(cholesky(m, 1e-10), Error);
  try {
    cholesky(m, 1e-10);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPositiveDefinite);
  }
}

TEST_CASE("cholesky rejects non-symmetric input") {
  Eigen::Matrix2d m;
  m << 2, 1, 0, 2;
  CHECK_THROWS_AS(cholesky(m, 0.0), Error);
}

TEST_CASE("cholesky reconstruction invariant on random SPD matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 12;
    const Eigen::MatrixXd g = test::gaussian(rng, n, n + 2);
    const Eigen::MatrixXd m = g * g.transpose();
    const auto f = cholesky(m, 0.0);
    const Eigen::MatrixXd shifted = m + f.jitter_used * Eigen::MatrixXd::Identity(n, n);
    CHECK((f.lower * f.lower.transpose() - shifted).norm() / m.norm() <= 1e-8);
  }
}

TEST_CASE("solve_cholesky") {
  SUBCASE("identity factor") {
    const auto f = cholesky(Eigen::MatrixXd::Identity(3, 3), 0.0);
    const Eigen::Vector3d b(1, 2, 3);
    CHECK((solve_cholesky(f, b) - b).norm() == 0.0);
  }
  SUBCASE("2x2 system residual") {
    Eigen::Matrix2d m;
    m << 4, 2, 2, 3;
    const auto f = cholesky(m, 0.0);
    const Eigen::Vector2d b(1, 0);
    const Eigen::VectorXd x = solve_cholesky(f, b);
    CHECK((m * x - b).norm() < 1e-10);
  }
  SUBCASE("mismatched length") {
    const auto f = cholesky(Eigen::MatrixXd::Identity(3, 3), 0.0);
    try {
      solve_cholesky(f, Eigen::Vector2d(1, 2));
      FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
  }
  SUBCASE("multiply after solve is identity on well-conditioned systems") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 2 + trial % 9;
      const Eigen::MatrixXd g = test::gaussian(rng, n, n);
      const Eigen::MatrixXd m = g * g.transpose() + n * Eigen::MatrixXd::Identity(n, n);
      const Eigen::VectorXd b = test::gaussian(rng, n, 1);
      const Eigen::VectorXd x = solve_cholesky(cholesky(m, 0.0), b);
      CHECK((m * x - b).norm() <= 1e-8 * std::max(1.0, b.norm()));
    }
  }
}

TEST_CASE("qr_orthonormalize") {
  SUBCASE("identity") {
    CHECK(qr_orthonormalize(Eigen::MatrixXd::Identity(4, 4)) == Eigen::MatrixXd::Identity(4, 4));
  }
  SUBCASE("scaled orthogonal columns") {
    Eigen::MatrixXd m(3, 2);
    m << 2, 0, 0, 3, 0, 0;
    Eigen::MatrixXd expected(3, 2);
    expected << 1, 0, 0, 1, 0, 0;
    CHECK(qr_orthonormalize(m) == expected);
  }
  SUBCASE("random 21x8 is orthonormal, spans the input, and is idempotent") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXd a = test::gaussian(rng, 21, 8);
      const Eigen::MatrixXd q = qr_orthonormalize(a);
      CHECK(test::max_abs(q.transpose() * q - Eigen::MatrixXd::Identity(8, 8)) < 1e-10);
      CHECK((a - q * (q.transpose() * a)).norm() < 1e-8);
      // R = QᵀA is upper triangular with a nonnegative diagonal.
      const Eigen::MatrixXd r = q.transpose() * a;
      CHECK((r.diagonal().array() >= 0).all());
      CHECK(test::max_abs(r.triangularView<Eigen::StrictlyLower>().toDenseMatrix()) < 1e-10);
      CHECK(test::max_abs(qr_orthonormalize(q) - q) < 1e-10);
    }
  }
  SUBCASE("dependent columns are rejected") {
    Eigen::MatrixXd m(3, 2);
    m << 1, 2, 1, 2, 1, 2;
    try {
      qr_orthonormalize(m);
      FAIL("expected RankDeficient");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RankDeficient);
    }
  }
  SUBCASE("float instantiation") {
    Eigen::MatrixXf m(2, 2);
    m << 1, 1, 0, 1;
    const Eigen::MatrixXf q = qr_orthonormalize(m);
    CHECK((q.transpose() * q - Eigen::MatrixXf::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6f);
  }
}

TEST_CASE("numerical_rank") {
  CHECK(numerical_rank(Eigen::MatrixXd::Identity(4, 4), 1e-10) == 4);
  CHECK(numerical_rank(Eigen::MatrixXd::Zero(3, 5), 1e-10) == 0);
  std::mt19937_64 rng(9);
  const Eigen::VectorXd u = test::gaussian(rng, 6, 1);
  const Eigen::VectorXd v = test::gaussian(rng, 4, 1);
  CHECK(numerical_rank(u * v.transpose(), 1e-10) == 1);
  const Eigen::MatrixXd g = test::gaussian(rng, 7, 3);
  CHECK(numerical_rank(g, 1e-10) == 3);
  CHECK(numerical_rank(g * g.transpose(), 1e-10) == 3);
}
