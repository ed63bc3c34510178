#pragma once

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "specnet/common.hpp"
#include "specnet/dynamics.hpp"

namespace specnet {

struct ObservationFunction {
    int p = 1;
    std::function<Vec(const Vec&)> map;
    std::function<Mat(const Vec&)> gradient;  // p x mn, optional
};

// f(X) = [x_{v1,c1}, x_{v2,c2}, ...], 0-based vertex and component
ObservationFunction select_states(const std::vector<std::pair<int, int>>& states, int m);
ObservationFunction identity_observation(int dim);
// f(X) = [sin(x_{v,0} + x_{v,1}), sin(x_{v,0} - x_{v,1})] for m = 2 units
ObservationFunction sine_pair_observation(int vertex, int m = 2);

// analytic gradient when available, central differences with step 1e-6 otherwise
Mat gradient_at(const ObservationFunction& f, const Vec& X);

struct SnapshotSet {
    int r = 0;
    int p = 0;
    double dt = 0;
    Mat Z;  // (r*p) x (K+1); rows l*p + i hold output i of experiment l
    int K() const { return static_cast<int>(Z.cols()) - 1; }
};

SnapshotSet observe(const std::vector<Trajectory>& trajectories, const ObservationFunction& f);

struct DataMatrix {
    Mat Z;  // q1 x (q2 + 1)
    int c = 1;
    int delta = 0;
    int q1 = 0;
    int q2 = 0;
    double dt = 0;
};

DataMatrix build_data_matrix(const SnapshotSet& s, int c, int delta);

struct ModeReport {
    bool nonvanishing = false;
    int rank = 0;
    int required = 0;
};

// rank of [Q, K^T Q, ..., (K^T)^{mn-1} Q] with Q = grad f^T
ModeReport check_mode_nonvanishing(const Mat& K, const Mat& grad_f);

// CSV: comment header "# r=<r> p=<p> dt=<dt>", then one row per time sample
// with r*p comma-separated values
void write_snapshots_csv(std::ostream& out, const SnapshotSet& s);
SnapshotSet read_snapshots_csv(std::istream& in);

}  // namespace specnet
