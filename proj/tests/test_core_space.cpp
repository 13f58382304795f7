#include <doctest.h>

#include <cmath>

#include "sprayconn/core_space.hpp"
#include "sprayconn/errors.hpp"
#include "sprayconn/linalg.hpp"
#include "sprayconn/sampling.hpp"

using namespace sprayconn;

TEST_CASE("seminorm examples on grades [2, 4]") {
  const ModelSpace s({2, 4}, 2);
  CHECK(seminorm(s, Vector{0, 0, 0, 0}, 1) == 0.0);
  CHECK(seminorm(s, Vector{1, -3, 2, 0}, 1) == 3.0);
  CHECK(seminorm(s, Vector{1, -3, 2, 0}, 2) == 3.0);
  CHECK(seminorm(s, Vector{1, -1, 5, 0}, 2) == 5.0);
}

TEST_CASE("seminorm rejects bad levels and sizes") {
  const ModelSpace s({2, 4}, 2);
  CHECK_THROWS_AS(seminorm(s, Vector{1, 2, 3, 4}, 0), DomainError);
  CHECK_THROWS_AS(seminorm(s, Vector{1, 2, 3, 4}, 3), DomainError);
  CHECK_THROWS_AS(seminorm(s, Vector{1, 2, 3}, 1), DimensionError);
}

TEST_CASE("weighted seminorm scales each grade block") {
  const ModelSpace s({2, 4}, 2, SeminormKind::weighted_sup, {1.0, 0.5});
  CHECK(seminorm(s, Vector{1, 0, 4, 0}, 2) == doctest::Approx(2.0));
  CHECK(seminorm(s, Vector{3, 0, 4, 0}, 2) == doctest::Approx(3.0));
}

TEST_CASE("project examples") {
  const ModelSpace s({2, 4}, 2);
  CHECK(project(s, Vector{1, 2, 3, 4}, 2, 2) == Vector{1, 2, 3, 4});
  CHECK(project(s, Vector{1, 2, 3, 4}, 2, 1) == Vector{1, 2});
  CHECK(project(ModelSpace({1}, 1), Vector{5}, 1, 1) == Vector{5});
  CHECK_THROWS_AS(project(s, Vector{1, 2}, 1, 2), DomainError);
}

TEST_CASE("model space rejects decreasing grades and bad levels") {
  CHECK_THROWS(ModelSpace({4, 2}, 1));
  CHECK_THROWS(ModelSpace({0, 2}, 1));
  CHECK_THROWS(ModelSpace({2, 4}, 3));
  CHECK_THROWS(ModelSpace({2, 4}, 0));
  const ModelSpace s({2, 4, 8}, 3);
  CHECK(s.dim() == 8);
  CHECK(s.at_level(1).dim() == 2);
  CHECK(s.grade_of(0) == 1);
  CHECK(s.grade_of(3) == 2);
  CHECK(s.grade_of(7) == 3);
}

TEST_CASE("projection is transitive and seminorms are monotone in level") {
  const ModelSpace s({2, 4, 8}, 3);
  Sampler rng(7);
  for (int k = 0; k < 200; ++k) {
    const Vector x = rng.uniform(8, -5, 5);
    const Vector y = rng.uniform(8, -5, 5);
    const double a = rng.uniform(-3, 3);
    for (std::size_t hi = 1; hi <= 3; ++hi) {
      const Vector xh = project(s, x, 3, hi);
      for (std::size_t mid = 1; mid <= hi; ++mid)
        for (std::size_t lo = 1; lo <= mid; ++lo)
          CHECK(project(s, project(s, xh, hi, mid), mid, lo) == project(s, xh, hi, lo));
    }
    for (std::size_t l = 1; l < 3; ++l) CHECK(seminorm(s, x, l) <= seminorm(s, x, l + 1));
    for (std::size_t l = 1; l <= 3; ++l) {
      CHECK(seminorm(s, x + y, l) <= seminorm(s, x, l) + seminorm(s, y, l));
      const double lhs = seminorm(s, a * x, l), rhs = std::fabs(a) * seminorm(s, x, l);
      CHECK(std::fabs(lhs - rhs) <= 1e-15 * rhs);
    }
  }
}

TEST_CASE("vector arithmetic and residual helpers") {
  const Vector a{1, 2, 3};
  const Vector b{0.5, -1, 4};
  CHECK(a + b == Vector{1.5, 1, 7});
  CHECK(a - b == Vector{0.5, 3, -1});
  CHECK(2.0 * a == Vector{2, 4, 6});
  CHECK(-a == Vector{-1, -2, -3});
  CHECK(norm_inf(b) == 4.0);
  CHECK(dot(a, b) == doctest::Approx(10.5));
  CHECK(head(a, 2) == Vector{1, 2});
  CHECK(concat(a, b).size() == 6);
  CHECK(scaled_residual(a, a) == 0.0);
  CHECK(scaled_residual(Vector{2}, Vector{4}) == doctest::Approx(2.0 / 5.0));
  CHECK_THROWS_AS(a + Vector{1}, DimensionError);
  CHECK_FALSE(Vector{1, NAN}.all_finite());
  CHECK(Vector{1, 2}.all_finite());
}

TEST_CASE("LU solve and inverse") {
  Matrix m(3, 3);
  const double vals[3][3] = {{0, 2, 1}, {1, 1, 0}, {3, 0, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = vals[i][j];
  const LuDecomposition lu(m);
  const Vector b{1, 2, 3};
  const Vector x = lu.solve(b);
  CHECK(norm_inf(m * x - b) < 1e-14);
  const Matrix prod = m * lu.inverse();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(prod(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
  Matrix singular(2, 2, 1.0);
  CHECK_THROWS_AS(LuDecomposition{singular}, DomainError);
}

TEST_CASE("sampler is reproducible from its seed") {
  Sampler a(42), b(42), c(43);
  const Vector va = a.uniform(5, -1, 1);
  CHECK(va == b.uniform(5, -1, 1));
  CHECK_FALSE(va == c.uniform(5, -1, 1));
  for (double x : va) {
    CHECK(x >= -1.0);
    CHECK(x < 1.0);
  }
}
