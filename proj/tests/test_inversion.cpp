#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "specnet/datasets.hpp"
#include "specnet/inversion.hpp"

using namespace specnet;

namespace {

LinearUnit as_linear(const oracle::Unit& u) { return {u.A, u.B, u.C}; }

LinearUnit example1() { return *catalog("example1").linear; }

LinearUnit scalar(double a, double b, double c) {
    return {Mat::Constant(1, 1, a), Vec::Constant(1, b), Vec::Constant(1, c)};
}

}  // namespace

TEST_CASE("g_map") {
    auto u = example1();
    SUBCASE("zero on sigma(A)") {
        for (auto a : oracle::eigs(u.A)) CHECK(g_map(a, u) == cplx(0.0));
    }
    SUBCASE("scalar resolvent") {
        const double a = -0.7, b = 2.0, c = 0.3;
        for (cplx mu : {cplx(1.0, 0), cplx(-3, 2), cplx(0.5, -1)}) {
            cplx expect = (a - mu) / (c * b);
            CHECK(std::abs(g_map(mu, scalar(a, b, c)) - expect) < 1e-12);
        }
    }
    SUBCASE("round trip through sigma(A - 2 BC^T)") {
        Mat M = u.A - 2.0 * u.B * u.C.transpose();
        for (auto mu : oracle::eigs(M)) CHECK(std::abs(g_map(mu, u) - 2.0) < 1e-9);
    }
    SUBCASE("determinant identity") {
        std::mt19937_64 rng(3);
        for (int t = 0; t < 20; ++t) {
            auto ou = oracle::random_unit(3, rng);
            cplx mu(0.37 * t - 2, 0.5);
            cplx g = g_map(mu, as_linear(ou));
            Eigen::MatrixXcd A = ou.A.cast<cplx>() - mu * Eigen::MatrixXcd::Identity(3, 3);
            Eigen::MatrixXcd Ag = A - g * (ou.B * ou.C.transpose()).cast<cplx>();
            CHECK(std::abs(Ag.determinant()) <= 1e-9 * std::max(1.0, std::abs(A.determinant())));
        }
    }
    SUBCASE("vanishing resolvent observation") {
        // C orthogonal to every Krylov vector of B
        LinearUnit d{Mat::Identity(2, 2) * -1.0, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
        CHECK_THROWS_AS(g_map(cplx(0.3, 0), d), DegenerateError);
    }
}

TEST_CASE("controllability and observability") {
    auto id = check_ctrb_obsv({Mat::Identity(2, 2), Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 1)});
    CHECK_FALSE(id.controllable);
    CHECK_FALSE(id.observable);

    auto ex1 = check_ctrb_obsv(example1());
    CHECK(ex1.controllable);
    CHECK(ex1.observable);

    Mat A(2, 2);
    A << -1, 0, 0, -2;
    auto eig = check_ctrb_obsv({A, Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1)});
    CHECK_FALSE(eig.controllable);
    CHECK(eig.observable);
}

TEST_CASE("sensitivity") {
    SUBCASE("scalar is constant") {
        auto u = scalar(-0.7, 2.0, 0.3);
        for (cplx mu : {cplx(1.0, 0), cplx(-3, 2)}) {
            // d/dmu (a - mu)/(cb) = -1/(cb)
            CHECK(std::abs(sensitivity(mu, u) - cplx(-1.0 / 0.6)) < 1e-12);
        }
    }
    SUBCASE("finite differences") {
        std::mt19937_64 rng(8);
        for (int t = 0; t < 30; ++t) {
            auto u = as_linear(oracle::random_unit(1 + t % 3, rng));
            cplx mu(-1.0 + 0.1 * t, 0.3);
            const double h = 1e-6;
            cplx fd = (g_map(mu + h, u) - g_map(mu - h, u)) / (2 * h);
            cplx d = sensitivity(mu, u);
            CHECK(std::abs(fd - d) <= 1e-5 * std::max(1.0, std::abs(d)));
            CHECK(std::abs(sensitivity_rational(mu, u) - d) <= 1e-8 * std::max(1.0, std::abs(d)));
        }
    }
    SUBCASE("singular resolvent") {
        auto u = example1();
        CHECK_THROWS_AS(sensitivity(oracle::eigs(u.A)[0], u), DegenerateError);
        // the rational form has a finite limit there
        cplx a = oracle::eigs(u.A)[0];
        cplx lim = sensitivity_rational(a, u);
        cplx near = sensitivity(a + cplx(1e-7, 0), u);
        CHECK(std::abs(lim - near) < 1e-4 * std::abs(lim));
    }
}

TEST_CASE("weighted average") {
    cplx l1(2.1, 0), l2(1.8, 0);
    cplx avg = weighted_average({l1, l2}, {1.0, 2.0});
    cplx expect = (l1 / 1.0 + l2 / 4.0) / (1.0 + 0.25);
    CHECK(std::abs(avg - expect) < 1e-14);
    // the less sensitive copy pulls harder
    CHECK(std::abs(avg - l1) < std::abs(avg - l2));
    CHECK(weighted_average({l1}, {cplx(0, 5)}) == l1);
    CHECK_THROWS_AS(weighted_average({l1}, {}), Error);
}

TEST_CASE("recover_spectrum") {
    auto u = example1();
    SUBCASE("sigma(A) maps to the zero eigenvalue") {
        auto rs = recover_spectrum(oracle::eigs(u.A), u);
        REQUIRE(rs.aggregated.size() == 1);
        CHECK(std::abs(rs.aggregated[0].lambda_bar) < 1e-12);
        CHECK(rs.aggregated[0].members.size() == 2);
        CHECK(rs.warnings.empty());
    }
    SUBCASE("exact sigma(K) of the 10-vertex graph") {
        auto g = datasets::ten_vertex();
        Mat L = laplacian(g);
        auto mu = oracle::eigs(build_K(u, L));
        auto rs = recover_spectrum(mu, u);
        for (const auto& e : rs.raw) CHECK(std::abs(g_map(e.mu, u) - e.lambda) == 0.0);
        std::vector<cplx> got;
        for (const auto& grp : rs.aggregated) {
            CHECK(grp.members.size() <= 2);
            got.push_back(grp.lambda_bar);
        }
        CHECK(oracle::multiset_distance(got, oracle::eigs(L)) < 1e-6);
        for (std::size_t i = 1; i < rs.aggregated.size(); ++i)
            CHECK(rs.aggregated[i - 1].lambda_bar.real() <= rs.aggregated[i].lambda_bar.real());
    }
    SUBCASE("degenerate entries are flagged, not fatal") {
        LinearUnit d{Mat::Identity(2, 2) * -1.0, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
        auto rs = recover_spectrum({cplx(0.3, 0), cplx(-1, 0)}, d);
        REQUIRE(rs.raw.size() == 2);
        CHECK(rs.raw[0].degenerate);
        CHECK(std::isnan(rs.raw[0].lambda.real()));
        CHECK_FALSE(rs.warnings.empty());
    }
    SUBCASE("undirected projection") {
        RecoveryOptions opt;
        opt.project_real = true;
        opt.group_tol = 1e-3;
        Mat M = u.A - 2.0 * u.B * u.C.transpose();
        auto mu = oracle::eigs(M);
        for (auto& z : mu) z += cplx(0, 1e-6);
        auto rs = recover_spectrum(mu, u, opt);
        REQUIRE(rs.aggregated.size() == 1);
        CHECK(rs.aggregated[0].lambda_bar.imag() == 0.0);
        CHECK(std::abs(rs.aggregated[0].lambda_bar - 2.0) < 1e-5);
    }
}

TEST_CASE("g maps sigma(K) onto sigma(L) for random networks") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> nd(2, 8), md(1, 3);
    int checked = 0;
    for (int t = 0; t < 100; ++t) {
        int n = nd(rng), m = md(rng);
        auto ou = oracle::random_unit(m, rng);
        auto arcs = oracle::random_arcs(n, 0.5, t % 2 == 1, rng);
        Mat L = oracle::laplacian_loops(n, arcs);
        auto u = as_linear(ou);
        std::vector<cplx> got;
        for (auto mu : oracle::eigs(build_K(u, L))) got.push_back(g_map(mu, u));
        std::vector<cplx> expect;
        for (auto lam : oracle::eigs(L))
            for (int k = 0; k < m; ++k) expect.push_back(lam);
        CHECK(oracle::multiset_distance(got, expect) < 1e-7);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("isospectral graphs give equal sigma(K)") {
    std::mt19937_64 rng(5);
    auto u = example1();
    for (int t = 0; t < 10; ++t) {
        const int n = 7;
        auto arcs = oracle::random_arcs(n, 0.5, true, rng);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<Edge> permuted;
        for (const auto& e : arcs) permuted.push_back({perm[e.i], perm[e.j], e.w});
        auto k1 = oracle::eigs(build_K(u, oracle::laplacian_loops(n, arcs)));
        auto k2 = oracle::eigs(build_K(u, oracle::laplacian_loops(n, permuted)));
        CHECK(oracle::multiset_distance(k1, k2) < 1e-8);
    }
}

TEST_CASE("error in lambda follows |Delta| times error in mu") {
    auto u = example1();
    Mat L = laplacian(datasets::ten_vertex());
    auto mus = oracle::eigs(build_K(u, L));
    const double eps = 1e-6;
    int checked = 0;
    for (auto mu : mus) {
        double dA = INFINITY;
        for (auto a : oracle::eigs(u.A)) dA = std::min(dA, std::abs(mu - a));
        if (dA < 1e-3) continue;
        cplx d = sensitivity(mu, u);
        double ratio = std::abs(g_map(mu + eps, u) - g_map(mu, u)) / eps;
        CHECK(ratio == doctest::Approx(std::abs(d)).epsilon(1e-4));
        ++checked;
    }
    CHECK(checked >= 16);
}
