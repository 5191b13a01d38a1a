#include <doctest.h>

#include "crembo/error.hpp"
#include "crembo/verification.hpp"
#include "support.hpp"

using namespace crembo;

TEST_CASE("rank preservation holds almost surely") {
  const auto r = verify_rank_preservation(21, 8, 6, 200, 1);
  CHECK(r.trials == 200);
  CHECK(r.full_rank_trials == 200);
  CHECK(r.fraction() == 1.0);
  CHECK(verify_rank_preservation(10, 4, 4, 50, 2).fraction() == 1.0);
  CHECK(to_json(r).at("passed") == true);
  CHECK_THROWS_AS(verify_rank_preservation(10, 3, 4, 1, 0), Error);
}

TEST_CASE("optimum recovery through the embedding") {
  SUBCASE("sphere") {
    const auto sweep = verify_recovery_sweep("sphere_d4_D50", 0, 20, 1);
    CHECK(sweep.d == 4);
    CHECK(sweep.passed());
    CHECK(sweep.max_recovery_error < 1e-6);
  }
  SUBCASE("styblinski-tang with d above d_e") {
    const auto sweep = verify_recovery_sweep("styblinski_tang_d8_D21", 10, 20, 100);
    CHECK(sweep.passed());
    CHECK(sweep.y_norms.size() == 20);
    CHECK(sweep.holds_over_epsilon_fraction.size() == 2);
    const auto j = to_json(sweep);
    CHECK(j.at("norm_bounds").size() == 2);
    CHECK(j.at("passed") == true);
  }
}

TEST_CASE("constructed embeddings") {
  const auto o = make_embedded_objective(BaseFunction::StyblinskiTang, 3, 8, 4);

  SUBCASE("A equal to the basis recovers c directly") {
    const Embedding e{o.basis, EmbeddingKind::Random};
    const auto r = verify_optimum_recovery(o, e);
    CHECK(r.subspace_residual < 1e-12);
    CHECK(test::max_abs(e.a * r.y_star - *o.optimizer_in_subspace()) < 1e-12);
    CHECK(r.recovery_error < 1e-9);
    CHECK(r.bounds.size() == 2);
    CHECK(r.y_norm == doctest::Approx(r.x_top_norm));
  }
  SUBCASE("A orthogonal to the effective subspace is rank deficient") {
    const Eigen::MatrixXd null_proj = Eigen::MatrixXd::Identity(8, 8) - o.basis * o.basis.transpose();
    std::mt19937_64 rng(1);
    const Embedding e{null_proj * test::gaussian(rng, 8, 4), EmbeddingKind::Random};
    try {
      verify_optimum_recovery(o, e);
      FAIL("expected RankDeficient");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::RankDeficient);
    }
  }
  SUBCASE("mismatched D") {
    CHECK_THROWS_AS(verify_optimum_recovery(o, sample_embedding(1, 9, 3)), Error);
  }
}
