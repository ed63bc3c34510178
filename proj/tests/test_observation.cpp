#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "specnet/datasets.hpp"
#include "specnet/observation.hpp"

using namespace specnet;

namespace {

SnapshotSet counting_snapshots(int r, int p, int K) {
    SnapshotSet s;
    s.r = r;
    s.p = p;
    s.dt = 0.1;
    s.Z.resize(r * p, K + 1);
    for (int i = 0; i < r * p; ++i)
        for (int k = 0; k <= K; ++k) s.Z(i, k) = 1000.0 * i + k;
    return s;
}

NetworkSystem example1_system() {
    NetworkSystem sys;
    sys.graph = datasets::ten_vertex();
    sys.unit = catalog("example1");
    return sys;
}

}  // namespace

TEST_CASE("observation functions") {
    Vec X = Vec::LinSpaced(6, 0.0, 0.5);
    auto sel = select_states({{0, 0}, {2, 1}}, 2);
    CHECK(sel.p == 2);
    Vec y = sel.map(X);
    CHECK(y(0) == X(0));
    CHECK(y(1) == X(5));
    Mat G = gradient_at(sel, X);
    CHECK(G.rows() == 2);
    CHECK(G(0, 0) == 1.0);
    CHECK(G(1, 5) == 1.0);
    CHECK(G.sum() == doctest::Approx(2.0));

    auto id = identity_observation(6);
    CHECK(id.map(X) == X);
    CHECK((gradient_at(id, X) - Mat::Identity(6, 6)).norm() < 1e-12);

    auto sp = sine_pair_observation(1);
    CHECK(sp.p == 2);
    Vec z = sp.map(X);
    CHECK(z(0) == doctest::Approx(std::sin(X(2) + X(3))));
    CHECK(z(1) == doctest::Approx(std::sin(X(2) - X(3))));
    // central differences on a map without an analytic gradient
    ObservationFunction bare{2, sp.map, nullptr};
    Mat Gfd = gradient_at(bare, X);
    CHECK(Gfd(0, 2) == doctest::Approx(std::cos(X(2) + X(3))).epsilon(1e-6));
    CHECK(Gfd(1, 3) == doctest::Approx(-std::cos(X(2) - X(3))).epsilon(1e-6));
    CHECK(std::abs(Gfd(0, 0)) < 1e-9);

    CHECK_THROWS_AS(select_states({}, 2), ConfigError);
    CHECK_THROWS_AS(select_states({{0, 2}}, 2), ConfigError);
    CHECK_THROWS_AS(sine_pair_observation(0, 1), ConfigError);
}

TEST_CASE("observe stacks experiments in order") {
    auto sys = example1_system();
    std::vector<Vec> X0s = {Vec::Ones(20), Vec::LinSpaced(20, -1, 1)};
    auto trs = simulate_many(sys, X0s, 0.4, 10);
    auto s = observe(trs, select_states({{0, 0}}, 2));
    CHECK(s.r == 2);
    CHECK(s.p == 1);
    CHECK(s.K() == 10);
    CHECK(s.dt == 0.4);
    for (int k = 0; k <= 10; ++k) {
        CHECK(s.Z(0, k) == trs[0].X(0, k));
        CHECK(s.Z(1, k) == trs[1].X(0, k));
    }

    // identity observation reproduces the trajectory bit for bit
    auto full = observe({trs[1]}, identity_observation(20));
    CHECK((full.Z - trs[1].X).norm() == 0.0);

    auto sp = observe(trs, sine_pair_observation(0));
    CHECK(sp.Z.rows() == 4);
    CHECK(sp.Z(2, 3) == std::sin(trs[1].X(0, 3) + trs[1].X(1, 3)));

    auto shorter = simulate(sys, X0s[0], 0.4, 9);
    CHECK_THROWS_AS(observe({trs[0], shorter}, identity_observation(20)), Error);
    CHECK_THROWS_AS(observe({}, identity_observation(20)), Error);
}

TEST_CASE("data matrix layout") {
    SUBCASE("no shifts") {
        auto s = counting_snapshots(2, 1, 7);
        auto D = build_data_matrix(s, 1, 0);
        CHECK(D.Z == s.Z);
        CHECK(D.q1 == 2);
        CHECK(D.q2 == 7);
    }
    SUBCASE("two shifts, ten experiments") {
        auto D = build_data_matrix(counting_snapshots(10, 1, 50), 2, 5);
        CHECK(D.Z.rows() == 20);
        CHECK(D.Z.cols() == 46);
        CHECK(D.q1 == 20);
        CHECK(D.q2 == 45);
        CHECK(D.dt == 0.1);
    }
    SUBCASE("three shifts index arithmetic") {
        const int r = 2, p = 2, K = 50, delta = 5;
        auto s = counting_snapshots(r, p, K);
        auto D = build_data_matrix(s, 3, delta);
        CHECK(D.q2 == 40);
        REQUIRE(D.Z.rows() == 3 * r * p);
        REQUIRE(D.Z.cols() == 41);
        bool ok = true;
        for (int b = 0; b < 3; ++b)
            for (int i = 0; i < r * p; ++i)
                for (int j = 0; j <= 40; ++j) ok &= D.Z(b * r * p + i, j) == 1000.0 * i + (j + b * delta);
        CHECK(ok);
    }
    SUBCASE("infeasible shifts") {
        auto s = counting_snapshots(1, 1, 10);
        CHECK_THROWS_AS(build_data_matrix(s, 3, 5), ConfigError);
        CHECK_THROWS_AS(build_data_matrix(s, 0, 1), ConfigError);
        CHECK_THROWS_AS(build_data_matrix(s, 2, 0), ConfigError);
        CHECK_NOTHROW(build_data_matrix(s, 2, 9));
    }
    SUBCASE("dimensions follow c*r*p and K-(c-1)delta+1") {
        std::mt19937_64 rng(4);
        std::uniform_int_distribution<int> small(1, 4), kd(20, 60);
        for (int t = 0; t < 50; ++t) {
            int r = small(rng), p = small(rng), c = small(rng), delta = small(rng), K = kd(rng);
            auto D = build_data_matrix(counting_snapshots(r, p, K), c, delta);
            CHECK(D.Z.rows() == c * r * p);
            CHECK(D.Z.cols() == K - (c - 1) * delta + 1);
        }
    }
}

TEST_CASE("shifted blocks obey the same one-step map") {
    auto sys = example1_system();
    std::mt19937_64 rng(6);
    std::normal_distribution<double> N(0, 1);
    Vec X0(20);
    for (int i = 0; i < 20; ++i) X0(i) = N(rng);
    auto tr = simulate(sys, X0, 0.1, 80);
    auto D = build_data_matrix(observe({tr}, identity_observation(20)), 2, 5);
    const int q2 = D.q2;
    Mat X0b = D.Z.block(0, 0, 20, q2), Y0b = D.Z.block(0, 1, 20, q2);
    Mat X1b = D.Z.block(20, 0, 20, q2), Y1b = D.Z.block(20, 1, 20, q2);
    Mat M = X0b.transpose().colPivHouseholderQr().solve(Y0b.transpose()).transpose();
    CHECK((M * X0b - Y0b).norm() <= 1e-8 * Y0b.norm());
    CHECK((M * X1b - Y1b).norm() <= 1e-6 * Y1b.norm());
}

TEST_CASE("mode observability check") {
    auto u = *catalog("example1").linear;
    Mat K = build_K(u, laplacian(datasets::ten_vertex()));
    auto zero = check_mode_nonvanishing(K, Mat::Zero(1, 20));
    CHECK_FALSE(zero.nonvanishing);
    CHECK(zero.rank == 0);
    CHECK(zero.required == 20);

    auto full = check_mode_nonvanishing(K, Mat::Identity(20, 20));
    CHECK(full.nonvanishing);
    CHECK(full.rank == 20);

    auto one = check_mode_nonvanishing(K, gradient_at(select_states({{0, 0}}, 2), Vec::Zero(20)));
    CHECK(one.nonvanishing);

    // two uncoupled identical units cannot be told apart from one of them
    Mat K2 = build_K(u, Mat::Zero(2, 2));
    CHECK_FALSE(check_mode_nonvanishing(K2, gradient_at(select_states({{0, 0}}, 2), Vec::Zero(4))).nonvanishing);

    CHECK_THROWS_AS(check_mode_nonvanishing(K, Mat::Zero(1, 19)), Error);
}

TEST_CASE("snapshot CSV") {
    SnapshotSet s;
    s.r = 2;
    s.p = 1;
    s.dt = 0.25;
    s.Z.resize(2, 4);
    s.Z << 1.0, 0.5, 1.0 / 3.0, -2e-17, 3.0, 2.5, 1e300, 0.1;
    std::stringstream ss;
    write_snapshots_csv(ss, s);
    auto back = read_snapshots_csv(ss);
    CHECK(back.r == 2);
    CHECK(back.p == 1);
    CHECK(back.dt == 0.25);
    CHECK(back.Z == s.Z);

    std::istringstream no_header("1,2\n3,4\n");
    CHECK_THROWS_AS(read_snapshots_csv(no_header), ParseError);

    std::istringstream bad("# r=2 p=1 dt=0.1\n1,2\n3,x\n");
    try {
        read_snapshots_csv(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }

    std::istringstream ragged("# r=2 p=1 dt=0.1\n1,2\n3\n");
    CHECK_THROWS_AS(read_snapshots_csv(ragged), ParseError);

    std::istringstream wide("# r=1 p=1 dt=0.1\n1,2\n");
    CHECK_THROWS_AS(read_snapshots_csv(wide), ParseError);
}
