#include "specnet/observation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace specnet {

ObservationFunction select_states(const std::vector<std::pair<int, int>>& states, int m) {
    if (states.empty()) throw ConfigError("observation needs at least one state");
    std::vector<int> idx;
    for (auto [v, c] : states) {
        if (v < 0 || c < 0 || c >= m) throw ConfigError("observed state index out of range");
        idx.push_back(v * m + c);
    }
    ObservationFunction f;
    f.p = static_cast<int>(idx.size());
    f.map = [idx](const Vec& X) -> Vec {
        Vec y(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] >= X.size()) throw Error("observed state outside the network state");
            y(i) = X(idx[i]);
        }
        return y;
    };
    f.gradient = [idx](const Vec& X) -> Mat {
        Mat G = Mat::Zero(idx.size(), X.size());
        for (std::size_t i = 0; i < idx.size(); ++i) G(i, idx[i]) = 1.0;
        return G;
    };
    return f;
}

ObservationFunction identity_observation(int dim) {
    ObservationFunction f;
    f.p = dim;
    f.map = [](const Vec& X) -> Vec { return X; };
    f.gradient = [](const Vec& X) -> Mat { return Mat::Identity(X.size(), X.size()); };
    return f;
}

ObservationFunction sine_pair_observation(int vertex, int m) {
    if (m < 2) throw ConfigError("sine pair observation needs m >= 2");
    const int a = vertex * m, b = vertex * m + 1;
    ObservationFunction f;
    f.p = 2;
    f.map = [a, b](const Vec& X) -> Vec {
        Vec y(2);
        y << std::sin(X(a) + X(b)), std::sin(X(a) - X(b));
        return y;
    };
    f.gradient = [a, b](const Vec& X) -> Mat {
        Mat G = Mat::Zero(2, X.size());
        double cp = std::cos(X(a) + X(b)), cm = std::cos(X(a) - X(b));
        G(0, a) = cp;
        G(0, b) = cp;
        G(1, a) = cm;
        G(1, b) = -cm;
        return G;
    };
    return f;
}

Mat gradient_at(const ObservationFunction& f, const Vec& X) {
    if (f.gradient) return f.gradient(X);
    Mat G(f.p, X.size());
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < X.size(); ++i) {
        Vec xp = X, xm = X;
        xp(i) += h;
        xm(i) -= h;
        G.col(i) = (f.map(xp) - f.map(xm)) / (2 * h);
    }
    return G;
}

SnapshotSet observe(const std::vector<Trajectory>& trajectories, const ObservationFunction& f) {
    if (trajectories.empty()) throw Error("observe: no trajectories");
    const auto cols = trajectories[0].X.cols();
    const double dt = trajectories[0].dt;
    for (const auto& t : trajectories)
        if (t.X.cols() != cols || t.dt != dt) throw Error("observe: trajectories differ in length or dt");
    SnapshotSet s;
    s.r = static_cast<int>(trajectories.size());
    s.p = f.p;
    s.dt = dt;
    s.Z.resize(static_cast<Eigen::Index>(s.r) * s.p, cols);
    for (int l = 0; l < s.r; ++l)
        for (Eigen::Index k = 0; k < cols; ++k) {
            Vec y = f.map(trajectories[l].X.col(k));
            if (y.size() != f.p) throw Error("observe: observation returned wrong dimension");
            s.Z.block(static_cast<Eigen::Index>(l) * s.p, k, s.p, 1) = y;
        }
    return s;
}

DataMatrix build_data_matrix(const SnapshotSet& s, int c, int delta) {
    if (c < 1) throw ConfigError("shift count c must be >= 1");
    if (c > 1 && delta < 1) throw ConfigError("shift increment delta must be >= 1 when c > 1");
    const int K = s.K();
    const int q2 = K - (c - 1) * delta;
    if (q2 < 1)
        throw ConfigError("infeasible shifts: K=" + std::to_string(K) + " c=" + std::to_string(c) +
                          " delta=" + std::to_string(delta) + " leave no columns");
    DataMatrix D;
    D.c = c;
    D.delta = c > 1 ? delta : 0;
    D.q1 = c * static_cast<int>(s.Z.rows());
    D.q2 = q2;
    D.dt = s.dt;
    D.Z.resize(D.q1, q2 + 1);
    const auto rp = s.Z.rows();
    for (int b = 0; b < c; ++b) D.Z.block(b * rp, 0, rp, q2 + 1) = s.Z.block(0, b * D.delta, rp, q2 + 1);
    return D;
}

namespace {

// orthonormal basis for the columns of W above tol * sigma_max(W)
Mat orth(const Mat& W, double abs_floor) {
    if (W.cols() == 0 || W.norm() == 0.0) return Mat(W.rows(), 0);
    Eigen::JacobiSVD<Mat> svd(W, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cut = std::max(1e-10 * sv(0), abs_floor);
    Eigen::Index k = 0;
    while (k < sv.size() && sv(k) > cut) ++k;
    return svd.matrixU().leftCols(k);
}

}  // namespace

// Rank of [Q, K^T Q, ..., (K^T)^{mn-1} Q] grown one block at a time with an
// orthonormal basis. Raw powers of K^T spread column norms by ||K||^{mn} and
// swamp a relative SVD cutoff.
ModeReport check_mode_nonvanishing(const Mat& K, const Mat& grad_f) {
    if (K.rows() != K.cols() || grad_f.cols() != K.rows())
        throw Error("observability check: inconsistent dimensions");
    const Eigen::Index N = K.rows();
    const Mat KT = K.transpose();
    const double knorm = std::max(KT.norm(), 1.0);
    Mat V = orth(grad_f.transpose(), 0.0);
    Mat fresh = V;
    while (fresh.cols() > 0 && V.cols() < N) {
        Mat W = KT * fresh;
        for (int pass = 0; pass < 2; ++pass) W -= V * (V.transpose() * W);
        Mat add = orth(W, 1e-10 * knorm);
        if (add.cols() == 0) break;
        Mat grown(N, V.cols() + add.cols());
        grown << V, add;
        V = grown;
        fresh = add;
    }
    ModeReport r;
    r.required = static_cast<int>(N);
    r.rank = static_cast<int>(V.cols());
    r.nonvanishing = r.rank == N;
    return r;
}

void write_snapshots_csv(std::ostream& out, const SnapshotSet& s) {
    out.precision(17);
    out << "# r=" << s.r << " p=" << s.p << " dt=" << s.dt << "\n";
    for (Eigen::Index k = 0; k < s.Z.cols(); ++k) {
        for (Eigen::Index i = 0; i < s.Z.rows(); ++i) out << (i ? "," : "") << s.Z(i, k);
        out << "\n";
    }
}

SnapshotSet read_snapshots_csv(std::istream& in) {
    SnapshotSet s;
    std::string line;
    int line_no = 0;
    std::vector<std::vector<double>> rows;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string kv;
            while (hs >> kv) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                try {
                    if (key == "r") s.r = std::stoi(val);
                    else if (key == "p") s.p = std::stoi(val);
                    else if (key == "dt") s.dt = std::stod(val);
                } catch (const std::exception&) {
                    throw ParseError(line_no, "bad header value '" + kv + "'");
                }
            }
            have_header = true;
            continue;
        }
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
                while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
                if (pos != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw ParseError(line_no, "bad number '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows[0].size()) throw ParseError(line_no, "ragged row");
        rows.push_back(std::move(row));
    }
    if (!have_header) throw ParseError(line_no, "missing '# r=.. p=.. dt=..' header");
    if (rows.empty()) throw ParseError(line_no, "no samples");
    if (s.r < 1 || s.p < 1 || !(s.dt > 0)) throw ParseError(1, "header needs r >= 1, p >= 1, dt > 0");
    if (static_cast<int>(rows[0].size()) != s.r * s.p) throw ParseError(line_no, "row width differs from r*p");
    s.Z.resize(s.r * s.p, rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k)
        for (int i = 0; i < s.r * s.p; ++i) s.Z(i, k) = rows[k][i];
    return s;
}

}  // namespace specnet
