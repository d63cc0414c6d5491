#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "maid/error.hpp"
#include "maid/retrieval.hpp"

using namespace maid;

namespace {

std::vector<double> random_rows(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    std::normal_distribution<double> g;
    std::vector<double> rows(n * d);
    // Per-column scales keep the leading eigenvalues apart.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) rows[i * d + j] = g(rng) * (1.0 + 2.0 * static_cast<double>(d - j));
    return rows;
}

struct Oracle {
    Eigen::MatrixXd coords;
    Eigen::Vector2d explained;
};

Oracle dense_pca(const std::vector<double>& rows, std::size_t n, std::size_t d) {
    Eigen::MatrixXd x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        rows.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    x.rowwise() -= x.colwise().mean();
    const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    const auto& vecs = solver.eigenvectors();
    Eigen::MatrixXd top(d, 2);
    top.col(0) = vecs.col(static_cast<Eigen::Index>(d) - 1);
    top.col(1) = vecs.col(static_cast<Eigen::Index>(d) - 2);
    const auto& vals = solver.eigenvalues();
    return {x * top, {vals(static_cast<Eigen::Index>(d) - 1), vals(static_cast<Eigen::Index>(d) - 2)}};
}

void check_against_oracle(const std::vector<double>& rows, std::size_t n, std::size_t d) {
    const auto got = pca_project(rows, n, d);
    const auto want = dense_pca(rows, n, d);
    for (int c = 0; c < 2; ++c) {
        CHECK(got.explained[c] == doctest::Approx(want.explained(c)).epsilon(1e-9));
        // Projections agree up to a per-component sign.
        const double sign = got.coords[0][c] * want.coords(0, c) < 0.0 ? -1.0 : 1.0;
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            worst = std::max(worst, std::abs(got.coords[i][c] - sign * want.coords(static_cast<Eigen::Index>(i), c)));
        CHECK(worst <= 1e-6);
    }
}

}  // namespace

TEST_CASE("pca matches a dense eigensolver on 10x5 data") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 10; ++t) check_against_oracle(random_rows(rng, 10, 5), 10, 5);
}

TEST_CASE("pca matches a dense eigensolver on assorted shapes") {
    std::mt19937_64 rng(2);
    for (auto [n, d] : {std::pair<std::size_t, std::size_t>{3, 2}, {20, 8}, {7, 12}, {50, 3}})
        check_against_oracle(random_rows(rng, n, d), n, d);
}

TEST_CASE("pca: components orthonormal, variances ordered, sign convention") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 3 + rng() % 30, d = 2 + rng() % 10;
        const auto r = pca_project(random_rows(rng, n, d), n, d);
        CHECK(r.explained[0] >= r.explained[1]);
        CHECK(r.explained[1] >= 0.0);
        double n0 = 0, n1 = 0, cross = 0;
        for (std::size_t j = 0; j < d; ++j) {
            n0 += r.components[0][j] * r.components[0][j];
            n1 += r.components[1][j] * r.components[1][j];
            cross += r.components[0][j] * r.components[1][j];
        }
        CHECK(std::abs(n0 - 1.0) <= 1e-6);
        CHECK(std::abs(n1 - 1.0) <= 1e-6);
        CHECK(std::abs(cross) <= 1e-6);
        for (const auto& comp : r.components) {
            const auto big = std::max_element(comp.begin(), comp.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
            CHECK(*big > 0.0);
        }
    }
}

TEST_CASE("pca: points on a line leave no second variance") {
    std::vector<double> rows;
    const std::vector<double> dir{1.0, -2.0, 0.5, 3.0};
    for (int i = 0; i < 12; ++i)
        for (double c : dir) rows.push_back(0.25 * i * c + 1.0);
    const auto r = pca_project(rows, 12, 4);
    CHECK(r.explained[0] > 0.0);
    CHECK(r.explained[1] <= 1e-8);
}

TEST_CASE("pca: identical points and bad shapes are rejected") {
    const std::vector<double> same(4 * 3, 2.5);
    try {
        pca_project(same, 4, 3);
        FAIL("expected DegenerateData");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateData);
    }
    CHECK_THROWS_AS(pca_project(std::vector<double>(4, 1.0), 2, 2), Error);
}
