#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "specnet/common.hpp"
#include "specnet/graph.hpp"
#include "specnet/random.hpp"

namespace specnet {

struct LinearUnit {
    Mat A;
    Vec B;
    Vec C;
    int m() const { return static_cast<int>(A.rows()); }
    void validate() const;
};

// x' = F(x) + G(x) * input(u),  y = H(x).
// `input` is the identity for the usual diffusive coupling; the saturated
// consensus model puts tanh(u/2) there.
struct NonlinearUnit {
    std::string name;
    int m = 1;
    std::function<Vec(const Vec&)> F;
    std::function<Vec(const Vec&)> G;
    std::function<double(const Vec&)> H;
    std::function<Mat(const Vec&)> dF;  // optional
    std::function<Vec(const Vec&)> dH;  // optional gradient of H
    std::function<double(double)> input;  // empty means identity
    double input_slope = 1.0;             // input'(0)
    Vec x_star;
    std::optional<LinearUnit> linear;  // exact linear model when the unit is linear
};

NonlinearUnit as_nonlinear(const LinearUnit& u, const std::string& name = "linear");

struct HeterogeneityModel {
    enum class Kind { none, iid_block, correlated, two_population };
    Kind kind = Kind::none;
    double s = 0.0;
    std::optional<Distribution> entry_dist;  // iid_block, default normal(0, s)
    std::optional<Distribution> eps_dist;    // correlated, default normal(0, s)
    Mat deltaA;                              // correlated / two_population direction
};

std::string to_string(HeterogeneityModel::Kind k);
HeterogeneityModel::Kind heterogeneity_kind_from_string(const std::string& s);

std::vector<Mat> sample_heterogeneity(const HeterogeneityModel& model, int n, int m, std::uint64_t seed);

struct NetworkSystem {
    WeightedDigraph graph;
    NonlinearUnit unit;
    HeterogeneityModel heterogeneity;
    std::vector<Mat> deltaA;  // realized, one m x m block per unit (may be empty = none)
};

struct Trajectory {
    double dt = 0;
    Mat X;  // mn x (steps+1), column k is the state at k*dt
    std::vector<double> times() const;
};

// K = I_n (x) A - L (x) B C^T
Mat build_K(const LinearUnit& unit, const Mat& L);
// block-diagonal delta K assembled from per-unit blocks
Mat build_delta_K(const std::vector<Mat>& blocks);

LinearUnit linearize(const NonlinearUnit& unit);
Vec find_equilibrium(const NonlinearUnit& unit, const Vec& guess);

// Example-1 linear unit, Example-2, the cubic unit, FitzHugh-Nagumo and the
// saturated consensus unit. Names: example1, example2, cubic,
// fitzhugh_nagumo, consensus_tanh.
NonlinearUnit catalog(const std::string& name);
std::vector<std::string> catalog_names();

// right-hand side of the coupled network at state X
Vec network_rhs(const NetworkSystem& sys, const Vec& X);

Trajectory simulate(const NetworkSystem& sys, const Vec& X0, double dt, int steps, int substeps = 10);
std::vector<Trajectory> simulate_many(const NetworkSystem& sys, const std::vector<Vec>& X0s, double dt, int steps,
                                      int substeps = 10);

// one-sample RK4 propagator of x' = M x with `substeps` internal steps
Mat rk4_propagator(const Mat& M, double dt, int substeps);

CVec eigenvalues(const Mat& M);

}  // namespace specnet
