#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "specnet/datasets.hpp"
#include "specnet/dmd.hpp"

using namespace specnet;

namespace {

// random stable linear system with well separated decay rates
Mat stable_matrix(int N, std::mt19937_64& rng) {
    std::normal_distribution<double> Nd(0, 1);
    Mat S(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) S(i, j) = Nd(rng);
    Mat D = Mat::Zero(N, N);
    for (int i = 0; i < N; ++i) D(i, i) = -0.2 - 0.3 * i;
    // one rotation block
    D(0, 1) = 1.5;
    D(1, 0) = -1.5;
    D(1, 1) = D(0, 0);
    return S * D * S.inverse();
}

DataMatrix snapshots_of(const Mat& M, const Vec& x0, double dt, int K) {
    Mat P = oracle::expm(M * dt);
    SnapshotSet s;
    s.r = 1;
    s.p = static_cast<int>(M.rows());
    s.dt = dt;
    s.Z.resize(M.rows(), K + 1);
    Vec x = x0;
    for (int k = 0; k <= K; ++k) {
        s.Z.col(k) = x;
        x = P * x;
    }
    return build_data_matrix(s, 1, 0);
}

}  // namespace

TEST_CASE("geometric scalar sequence") {
    SnapshotSet s;
    s.r = 1;
    s.p = 1;
    s.dt = 0.3;
    s.Z.resize(1, 8);
    for (int k = 0; k < 8; ++k) s.Z(0, k) = std::ldexp(1.0, k);
    auto res = dmd(build_data_matrix(s, 1, 0));
    REQUIRE(res.discrete_eigs.size() == 1);
    CHECK(std::abs(res.discrete_eigs(0) - 2.0) < 1e-12);
    CHECK(std::abs(res.continuous_eigs(0) - std::log(2.0) / 0.3) < 1e-12);
    CHECK(res.rank_used == 1);
}

TEST_CASE("full-state linear data gives exp(mu dt)") {
    std::mt19937_64 rng(21);
    const int N = 5;
    const double dt = 0.2;
    Mat M = stable_matrix(N, rng);
    auto D = snapshots_of(M, Vec::Ones(N), dt, 30);
    auto res = dmd(D);
    REQUIRE(res.discrete_eigs.size() == N);
    std::vector<cplx> expect;
    for (auto mu : oracle::eigs(M)) expect.push_back(std::exp(mu * dt));
    CHECK(oracle::multiset_distance(to_vector(res.discrete_eigs), expect) < 1e-8);
    CHECK(oracle::multiset_distance(to_vector(res.continuous_eigs), oracle::eigs(M)) < 1e-7);

    SUBCASE("conjugate symmetry") {
        auto ev = to_vector(res.continuous_eigs);
        std::vector<cplx> conj;
        for (auto z : ev) conj.push_back(std::conj(z));
        CHECK(oracle::multiset_distance(ev, conj) < 1e-9);
    }
    SUBCASE("reconstruction") {
        Vec z0 = D.Z.col(0);
        CVec b = dmd_amplitudes(res, z0);
        double worst = 0;
        for (int j = 0; j <= 30; ++j) {
            CVec zj = dmd_reconstruct(res, b, j);
            worst = std::max(worst, (zj - D.Z.col(j).cast<cplx>()).norm() / D.Z.col(j).norm());
        }
        CHECK(worst <= 1e-6);
    }
    SUBCASE("pseudoinverse form gives the same eigenvalues") {
        const auto q2 = D.Z.cols() - 1;
        Mat X = D.Z.leftCols(q2), Y = D.Z.rightCols(q2);
        Mat T = Y * X.completeOrthogonalDecomposition().pseudoInverse();
        CHECK(oracle::multiset_distance(oracle::eigs(T), to_vector(res.discrete_eigs)) < 1e-8);
    }
}

TEST_CASE("shift stacking recovers modes hidden from a single output") {
    auto u = *catalog("example1").linear;
    auto g = datasets::ten_vertex();
    Mat K = build_K(u, laplacian(g));
    NetworkSystem sys;
    sys.graph = g;
    sys.unit = catalog("example1");
    std::mt19937_64 rng(1);
    std::normal_distribution<double> N(0, 1);
    std::vector<Vec> X0s;
    for (int l = 0; l < 10; ++l) {
        Vec x(20);
        for (int i = 0; i < 20; ++i) x(i) = N(rng);
        X0s.push_back(x);
    }
    auto s = observe(simulate_many(sys, X0s, 0.4, 50), select_states({{0, 0}}, 2));
    // one output per experiment gives only r = 10 rows, fewer than the 20 modes
    auto plain = dmd(build_data_matrix(s, 1, 0), 0.0);
    CHECK(plain.rank_used <= 10);
    auto stacked = dmd(build_data_matrix(s, 2, 5), 0.0);
    CHECK(stacked.rank_used == 20);
    CHECK(oracle::multiset_distance(to_vector(stacked.continuous_eigs), oracle::eigs(K)) < 1e-3);
}

TEST_CASE("rank truncation") {
    Mat X(3, 4), Y(3, 4);
    X << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1e-13, 0;
    Y = 0.5 * X;
    auto trunc = dmd(X, Y, 1.0, 1e-10);
    CHECK(trunc.rank_used == 2);
    CHECK(trunc.singular_values.size() == 3);
    auto full = dmd(X, Y, 1.0, 0.0);
    CHECK(full.rank_used == 3);
    for (auto nu : to_vector(full.discrete_eigs)) CHECK(std::abs(nu - 0.5) < 1e-9);
}

TEST_CASE("degenerate input") {
    CHECK_THROWS_AS(dmd(Mat::Zero(2, 3), Mat::Zero(2, 3), 0.1), DegenerateError);
    DataMatrix one;
    one.Z = Mat::Ones(2, 1);
    one.dt = 0.1;
    CHECK_THROWS_AS(dmd(one), DegenerateError);
    CHECK_THROWS_AS(dmd(Mat::Ones(2, 3), Mat::Ones(2, 2), 0.1), Error);
    CHECK_THROWS_AS(dmd(Mat::Ones(2, 3), Mat::Ones(2, 3), 0.0), Error);
}

TEST_CASE("zero discrete eigenvalue is dropped with a warning") {
    Mat X = Mat::Identity(2, 2);
    Mat Y = Mat::Zero(2, 2);
    Y(0, 0) = 0.5;
    auto res = dmd(X, Y, 1.0);
    CHECK(res.discrete_eigs.size() == 1);
    CHECK(std::abs(res.discrete_eigs(0) - 0.5) < 1e-12);
    CHECK(res.warnings.size() == 1);
}

TEST_CASE("outlier filter") {
    OutlierPolicy pol;
    CHECK(filter_outliers({}, pol, 0.1).empty());
    auto kept = filter_outliers({-1.0, -2.0, 3.0}, pol, 0.1);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0] == cplx(-1.0));
    CHECK(kept[1] == cplx(-2.0));

    // too fast, near-Nyquist and non-finite values go
    double dt = 0.5, nyq = M_PI / dt;
    auto k2 = filter_outliers({cplx(-60, 0), cplx(-1, 0.99 * nyq), cplx(-1, 0.9 * nyq), cplx(NAN, 0)}, pol, dt);
    REQUIRE(k2.size() == 1);
    CHECK(k2[0] == cplx(-1, 0.9 * nyq));

    pol.re_max = 5.0;
    pol.im_max = 0.5;
    auto k3 = filter_outliers({cplx(3, 0), cplx(-1, 0.6)}, pol, dt);
    REQUIRE(k3.size() == 1);
    CHECK(k3[0] == cplx(3, 0));
}
