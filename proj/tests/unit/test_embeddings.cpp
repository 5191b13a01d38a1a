#include <doctest.h>

#include <random>

#include "crembo/embeddings.hpp"
#include "crembo/error.hpp"
#include "support.hpp"

using namespace crembo;

TEST_CASE("sample_embedding is deterministic and shaped D x d") {
  const auto a = sample_embedding(7, 21, 8);
  const auto b = sample_embedding(7, 21, 8);
  CHECK(a.big_d() == 21);
  CHECK(a.d() == 8);
  CHECK(a.kind == EmbeddingKind::Random);
  CHECK(a.a == b.a);
  CHECK(sample_embedding(8, 21, 8).a != a.a);

  const auto square = sample_embedding(7, 3, 3);
  CHECK(std::abs(square.a.determinant()) > 1e-8);
}

TEST_CASE("sample_embedding entries look standard normal") {
  const auto e = sample_embedding(1, 400, 50);
  const double mean = e.a.mean();
  const double var = (e.a.array() - mean).square().mean();
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("sample_embedding rejects bad dimensions") {
  for (auto [big_d, d] : {std::pair{3, 4}, std::pair{5, 0}}) {
    try {
      sample_embedding(1, big_d, d);
      FAIL("expected InvalidDimensions");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidDimensions);
    }
  }
}

TEST_CASE("orthogonalize") {
  SUBCASE("orthonormal input is unchanged") {
    Embedding e{Eigen::MatrixXd::Identity(5, 3), EmbeddingKind::Random};
    const auto q = orthogonalize(e);
    CHECK(q.kind == EmbeddingKind::Orthogonalized);
    CHECK(q.a == e.a);
  }
  SUBCASE("random 21x8: orthonormal columns with the same span") {
    const auto e = sample_embedding(42, 21, 8);
    const auto q = orthogonalize(e);
    CHECK(test::max_abs(q.a.transpose() * q.a - Eigen::MatrixXd::Identity(8, 8)) < 1e-10);
    for (Eigen::Index j = 0; j < 8; ++j) {
      const Eigen::VectorXd col = e.a.col(j);
      CHECK((col - q.a * (q.a.transpose() * col)).norm() < 1e-10 * std::max(1.0, col.norm()));
    }
    CHECK(((Eigen::MatrixXd::Identity(21, 21) - q.a * q.a.transpose()) * e.a).norm() < 1e-8);
  }
  SUBCASE("orthogonalized embeddings are isometries before clamping") {
    const auto q = orthogonalize(sample_embedding(4, 21, 8));
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd y = test::uniform(rng, 8, -2.0, 2.0);
      CHECK(std::abs(project_up_unclamped(q, y).norm() - y.norm()) < 1e-10);
    }
  }
}

TEST_CASE("project_up") {
  SUBCASE("identity embedding inside the box") {
    Embedding e{Eigen::MatrixXd::Identity(3, 3), EmbeddingKind::Random};
    const auto box = SearchBox::centered(3, 1.0, 1.0);
    const Eigen::Vector3d y(0.5, -0.25, 0.0);
    CHECK(project_up(e, y, box) == Eigen::VectorXd(y));
  }
  SUBCASE("coordinates beyond the box are clamped to the bound exactly") {
    Embedding e{Eigen::MatrixXd::Identity(4, 4), EmbeddingKind::Random};
    e.a(3, 3) = 5.0;
    const auto box = SearchBox::centered(4, 1.0, 1.0);
    const Eigen::Vector4d y(0.1, 0.2, 0.3, 0.5);
    const Eigen::VectorXd x = project_up(e, y, box);
    CHECK(x(3) == 1.0);
    CHECK(x(0) == 0.1);
  }
  SUBCASE("the origin maps to the origin") {
    const auto e = sample_embedding(3, 21, 8);
    const auto box = SearchBox::centered(21, default_low_dim_half_width(8));
    CHECK(project_up(e, Eigen::VectorXd::Zero(8), box) == Eigen::VectorXd::Zero(21));
  }
  SUBCASE("outputs always lie in the high-dimensional box") {
    const auto e = sample_embedding(5, 30, 4);
    const auto box = SearchBox::centered(30, default_low_dim_half_width(4));
    std::mt19937_64 rng(8);
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd y = test::uniform(rng, 4, -2.0, 2.0);
      CHECK(box.contains_high(project_up(e, y, box)));
    }
  }
  SUBCASE("low-dimensional points outside [-w, w]^d are rejected") {
    const auto e = sample_embedding(5, 10, 2);
    const auto box = SearchBox::centered(10, 1.0);
    try {
      project_up(e, Eigen::Vector2d(1.5, 0.0), box);
      FAIL("expected OutOfSearchBox");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::OutOfSearchBox);
    }
  }
}

TEST_CASE("default_low_dim_half_width is sqrt(d)") {
  CHECK(default_low_dim_half_width(4) == 2.0);
  CHECK(default_low_dim_half_width(1) == 1.0);
  CHECK(default_low_dim_half_width(8) == doctest::Approx(2.8284271247461903));
}

TEST_CASE("embedding JSON document round-trips exactly") {
  const auto e = orthogonalize(sample_embedding(12, 21, 8));
  const auto j = to_json(e);
  CHECK(j.at("big_d") == 21);
  CHECK(j.at("d") == 8);
  CHECK(j.at("kind") == "orthogonalized");
  CHECK(j.at("entries").size() == 168);
  CHECK(j.at("entries")[1].get<double>() == e.a(0, 1));  // row-major
  const auto back = embedding_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.a == e.a);
  CHECK(back.kind == e.kind);

  auto bad = j;
  bad["entries"].erase(0);
  CHECK_THROWS_AS(embedding_from_json(bad), Error);
}
