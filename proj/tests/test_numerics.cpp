#include <cmath>

#include "bcosad/errors.hpp"
#include "bcosad/numerics.hpp"
#include "bcosad/rng.hpp"
#include "doctest.h"

using namespace bcosad;

TEST_SUITE("numerics") {

TEST_CASE("matrix construction checks size and finiteness") {
    CHECK_THROWS_AS(Matrix(2, 2, Vec{1, 2, 3}), DimensionError);
    CHECK_THROWS_AS(Matrix(1, 2, Vec{1, NAN}), ConfigError);
    CHECK_THROWS_AS(Matrix::from_rows({{1, 2}, {3}}), DimensionError);
    const Matrix m = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m(1, 2) == 6);
    const Matrix t = m.transposed();
    CHECK(t.rows() == 3);
    CHECK(t(2, 1) == 6);
    Matrix e;
    e.append_row(Vec{1, 2});
    CHECK(e.cols() == 2);
    CHECK_THROWS_AS(e.append_row(Vec{1, 2, 3}), DimensionError);
}

TEST_CASE("dot, norm, distance") {
    CHECK(dot(Vec{1, 2, 3}, Vec{4, 5, 6}) == 32.0);
    CHECK(dot(Vec{}, Vec{}) == 0.0);
    CHECK_THROWS_AS(dot(Vec{1}, Vec{1, 2}), DimensionError);
    CHECK(norm(Vec{3, 4}) == doctest::Approx(5.0));
    CHECK(distance(Vec{0, 0}, Vec{3, 4}) == doctest::Approx(5.0));
    CHECK(squared_distance(Vec{1, 1}, Vec{1, 1}) == 0.0);
}

TEST_CASE("cosine examples and floor") {
    CHECK(cosine(Vec{1, 0}, Vec{0, 1}) == 0.0);
    CHECK(cosine(Vec{1, 1}, Vec{2, 2}) == doctest::Approx(1.0));
    CHECK(cosine(Vec{1, 0}, Vec{-3, 0}) == doctest::Approx(-1.0));
    CHECK(cosine(Vec{0, 0}, Vec{1, 0}) == 0.0);
    CHECK(cosine(Vec{1e-13, 0}, Vec{1, 0}) == 0.0);
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        Vec a(5), b(5);
        for (auto& x : a) x = rng.normal();
        for (auto& x : b) x = rng.normal();
        const double c = cosine(a, b);
        CHECK(c >= -1.0);
        CHECK(c <= 1.0);
    }
}

TEST_CASE("matvec, vecmat, matmul") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    const Vec mv = matvec(a, Vec{1, 1});
    CHECK(mv == Vec{3, 7});
    const Vec vm = vecmat(Vec{1, 1}, a);
    CHECK(vm == Vec{4, 6});
    const Matrix p = matmul(a, Matrix::identity(2));
    CHECK(p == a);
    const Matrix sq = matmul(a, a);
    CHECK(sq == Matrix::from_rows({{7, 10}, {15, 22}}));
    CHECK_THROWS_AS(matmul(a, Matrix(3, 1)), DimensionError);
    CHECK_THROWS_AS(matvec(a, Vec{1}), DimensionError);
}

TEST_CASE("cholesky reconstructs SPD matrices") {
    const Matrix cov = Matrix::from_rows({{4, 2}, {2, 3}});
    const auto r = cholesky(cov);
    CHECK(r.jitter == 0.0);
    CHECK(r.lower(0, 0) == doctest::Approx(2.0));
    CHECK(r.lower(1, 0) == doctest::Approx(1.0));
    CHECK(r.lower(1, 1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(r.lower(0, 1) == 0.0);

    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
        Matrix g(6, 6);
        for (auto& x : g.data()) x = rng.normal();
        Matrix s = matmul(g, g.transposed());
        for (std::size_t i = 0; i < 6; ++i) s(i, i) += 0.1;
        const auto c = cholesky(s);
        const Matrix back = matmul(c.lower, c.lower.transposed());
        for (std::size_t i = 0; i < 36; ++i) CHECK(back.data()[i] == doctest::Approx(s.data()[i]).epsilon(1e-10));
    }
}

TEST_CASE("cholesky jitter ladder on singular input") {
    // rank one: plain factorization hits a zero pivot
    const Matrix cov = Matrix::from_rows({{1, 1}, {1, 1}});
    const auto r = cholesky(cov);
    CHECK(r.jitter >= 1e-8);
    CHECK(r.jitter <= 1e-2);
    const Matrix back = matmul(r.lower, r.lower.transposed());
    CHECK(back(0, 0) == doctest::Approx(1.0 + r.jitter));
    CHECK(back(0, 1) == doctest::Approx(1.0));

    const Matrix neg = Matrix::from_rows({{-1, 0}, {0, 1}});
    CHECK_THROWS_AS(cholesky(neg), DecompositionError);
    CHECK_THROWS_AS(cholesky(Matrix(2, 3)), DimensionError);
}

TEST_CASE("pca recovers a dominant axis") {
    Rng rng(5);
    Matrix data;
    for (int i = 0; i < 300; ++i) {
        const double t = 3.0 * rng.normal();
        data.append_row(Vec{t + 0.01 * rng.normal(), 0.5 * rng.normal(), 0.01 * rng.normal()});
    }
    const auto p = pca_project(data, 2);
    CHECK(p.components.rows() == 2);
    CHECK(std::abs(p.components(0, 0)) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(p.components(1, 1)) == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(dot(p.components.row(0), p.components.row(1)) == doctest::Approx(0.0).epsilon(1e-9));
    // largest-magnitude coordinate is positive
    CHECK(p.components(0, 0) > 0.0);
    CHECK(p.projected.rows() == 300);
    const Matrix again = pca_transform(p, data);
    for (std::size_t i = 0; i < again.data().size(); ++i) CHECK(again.data()[i] == doctest::Approx(p.projected.data()[i]));
    CHECK_THROWS_AS(pca_project(data, 4), DimensionError);
    CHECK_THROWS(pca_project(Matrix::from_rows({{1, 2}}), 1));
}

TEST_CASE("pca on constant data gives zero projections") {
    const Matrix data = Matrix::from_rows({{1, 2}, {1, 2}, {1, 2}});
    const auto p = pca_project(data, 1);
    for (double v : p.projected.data()) CHECK(v == 0.0);
}

}
