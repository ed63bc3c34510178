#include "specnet/dynamics.hpp"

#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

namespace specnet {

void LinearUnit::validate() const {
    if (A.rows() < 1 || A.rows() != A.cols()) throw Error("A must be square with m >= 1");
    if (B.size() != A.rows() || C.size() != A.rows()) throw Error("B and C must have length m");
}

NonlinearUnit as_nonlinear(const LinearUnit& u, const std::string& name) {
    u.validate();
    NonlinearUnit nl;
    nl.name = name;
    nl.m = u.m();
    Mat A = u.A;
    Vec B = u.B, C = u.C;
    nl.F = [A](const Vec& x) -> Vec { return A * x; };
    nl.G = [B](const Vec&) -> Vec { return B; };
    nl.H = [C](const Vec& x) { return C.dot(x); };
    nl.dF = [A](const Vec&) -> Mat { return A; };
    nl.dH = [C](const Vec&) -> Vec { return C; };
    nl.x_star = Vec::Zero(u.m());
    nl.linear = u;
    return nl;
}

std::string to_string(HeterogeneityModel::Kind k) {
    switch (k) {
        case HeterogeneityModel::Kind::none: return "none";
        case HeterogeneityModel::Kind::iid_block: return "iid_block";
        case HeterogeneityModel::Kind::correlated: return "correlated";
        case HeterogeneityModel::Kind::two_population: return "two_population";
    }
    return "none";
}

HeterogeneityModel::Kind heterogeneity_kind_from_string(const std::string& s) {
    if (s == "none") return HeterogeneityModel::Kind::none;
    if (s == "iid_block") return HeterogeneityModel::Kind::iid_block;
    if (s == "correlated") return HeterogeneityModel::Kind::correlated;
    if (s == "two_population") return HeterogeneityModel::Kind::two_population;
    throw ConfigError("unknown heterogeneity kind '" + s + "'");
}

std::vector<Mat> sample_heterogeneity(const HeterogeneityModel& model, int n, int m, std::uint64_t seed) {
    std::vector<Mat> out(n, Mat::Zero(m, m));
    Rng rng(seed);
    using K = HeterogeneityModel::Kind;
    switch (model.kind) {
        case K::none: break;
        case K::iid_block: {
            Distribution d = model.entry_dist.value_or(Distribution::normal(0.0, model.s));
            for (auto& M : out)
                for (int j = 0; j < m; ++j)
                    for (int i = 0; i < m; ++i) M(i, j) = d.sample(rng);
            break;
        }
        case K::correlated:
        case K::two_population: {
            if (model.deltaA.rows() != m || model.deltaA.cols() != m)
                throw ConfigError("heterogeneity deltaA must be m x m");
            Distribution d = model.kind == K::two_population
                                 ? Distribution::two_point(0.5)
                                 : model.eps_dist.value_or(Distribution::normal(0.0, model.s));
            for (auto& M : out) M = d.sample(rng) * model.deltaA;
            break;
        }
    }
    return out;
}

std::vector<double> Trajectory::times() const {
    std::vector<double> t(X.cols());
    for (Eigen::Index k = 0; k < X.cols(); ++k) t[k] = k * dt;
    return t;
}

Mat build_K(const LinearUnit& unit, const Mat& L) {
    unit.validate();
    const Eigen::Index n = L.rows();
    Mat BC = unit.B * unit.C.transpose();
    return Mat(Eigen::kroneckerProduct(Mat::Identity(n, n), unit.A)) - Mat(Eigen::kroneckerProduct(L, BC));
}

Mat build_delta_K(const std::vector<Mat>& blocks) {
    if (blocks.empty()) return Mat();
    const Eigen::Index m = blocks[0].rows();
    Mat D = Mat::Zero(m * blocks.size(), m * blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) D.block(k * m, k * m, m, m) = blocks[k];
    return D;
}

namespace {

Mat fd_jacobian(const std::function<Vec(const Vec&)>& F, const Vec& x) {
    const Eigen::Index m = x.size();
    Mat J(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double h = 1e-6 * (1.0 + std::abs(x(i)));
        Vec xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        J.col(i) = (F(xp) - F(xm)) / (2 * h);
    }
    return J;
}

Vec fd_gradient(const std::function<double(const Vec&)>& H, const Vec& x) {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double h = 1e-6 * (1.0 + std::abs(x(i)));
        Vec xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        g(i) = (H(xp) - H(xm)) / (2 * h);
    }
    return g;
}

}  // namespace

LinearUnit linearize(const NonlinearUnit& unit) {
    if (unit.x_star.size() != unit.m) throw Error("unit '" + unit.name + "' has no equilibrium set");
    if (unit.linear) return *unit.linear;
    LinearUnit lin;
    lin.A = unit.dF ? unit.dF(unit.x_star) : fd_jacobian(unit.F, unit.x_star);
    lin.B = unit.G(unit.x_star) * unit.input_slope;
    lin.C = unit.dH ? unit.dH(unit.x_star) : fd_gradient(unit.H, unit.x_star);
    return lin;
}

Vec find_equilibrium(const NonlinearUnit& unit, const Vec& guess) {
    if (guess.size() != unit.m) throw Error("equilibrium guess has wrong dimension");
    Vec x = guess;
    for (int it = 0; it < 100; ++it) {
        Vec f = unit.F(x);
        if (!f.allFinite()) break;
        if (f.norm() <= 1e-10) return x;
        Mat J = fd_jacobian(unit.F, x);
        Eigen::FullPivLU<Mat> lu(J);
        if (!lu.isInvertible()) throw ConvergenceError("singular Jacobian in Newton iteration");
        x -= lu.solve(f);
    }
    Vec f = unit.F(x);
    if (f.allFinite() && f.norm() <= 1e-10) return x;
    throw ConvergenceError("Newton iteration did not converge for unit '" + unit.name + "'");
}

NonlinearUnit catalog(const std::string& name) {
    if (name == "example1") {
        LinearUnit u;
        u.A.resize(2, 2);
        u.A << -1, -2, 1, -1;
        u.B = Vec(2);
        u.B << 1, 2;
        u.C = Vec(2);
        u.C << 1, 1;
        return as_nonlinear(u, name);
    }
    NonlinearUnit nl;
    nl.name = name;
    if (name == "example2") {
        nl.m = 2;
        nl.F = [](const Vec& x) -> Vec {
            Vec f(2);
            f << -x(0) - x(0) * x(0) * x(0) - 2 * x(1), x(0) - x(1) - x(1) * x(1) * x(1);
            return f;
        };
        nl.G = [](const Vec& x) -> Vec {
            Vec g(2);
            g << std::cos(x(1)), 1.5 * std::cos(x(1));
            return g;
        };
        nl.H = [](const Vec& x) { return x(0) + x(0) * x(0) + x(1); };
        nl.dF = [](const Vec& x) -> Mat {
            Mat J(2, 2);
            J << -1 - 3 * x(0) * x(0), -2, 1, -1 - 3 * x(1) * x(1);
            return J;
        };
        nl.dH = [](const Vec& x) -> Vec {
            Vec g(2);
            g << 1 + 2 * x(0), 1;
            return g;
        };
        nl.x_star = Vec::Zero(2);
    } else if (name == "cubic") {
        nl.m = 1;
        nl.F = [](const Vec& x) -> Vec { return Vec::Constant(1, -0.5 * x(0) + x(0) * x(0) * x(0)); };
        nl.G = [](const Vec&) -> Vec { return Vec::Constant(1, 0.05); };
        nl.H = [](const Vec& x) { return x(0); };
        nl.dF = [](const Vec& x) -> Mat { return Mat::Constant(1, 1, -0.5 + 3 * x(0) * x(0)); };
        nl.dH = [](const Vec&) -> Vec { return Vec::Ones(1); };
        nl.x_star = Vec::Zero(1);
    } else if (name == "fitzhugh_nagumo") {
        nl.m = 2;
        nl.F = [](const Vec& x) -> Vec {
            double V = x(0), w = x(1);
            Vec f(2);
            f << -w - V * (V - 1) * (V - 1) + 1, 0.5 * (V - w);
            return f;
        };
        nl.G = [](const Vec&) -> Vec {
            Vec g(2);
            g << 2, 0;
            return g;
        };
        nl.H = [](const Vec& x) { return 2 * x(0); };
        nl.dF = [](const Vec& x) -> Mat {
            double V = x(0);
            Mat J(2, 2);
            J << -(V - 1) * (V - 1) - 2 * V * (V - 1), -1, 0.5, -0.5;
            return J;
        };
        nl.dH = [](const Vec&) -> Vec {
            Vec g(2);
            g << 2, 0;
            return g;
        };
        Vec guess(2);
        guess << 0.9, 0.9;
        nl.x_star = find_equilibrium(nl, guess);
    } else if (name == "consensus_tanh") {
        // x' = 0.2 tanh(u/2)
        nl.m = 1;
        nl.F = [](const Vec&) -> Vec { return Vec::Zero(1); };
        nl.G = [](const Vec&) -> Vec { return Vec::Constant(1, 0.2); };
        nl.H = [](const Vec& x) { return x(0); };
        nl.dF = [](const Vec&) -> Mat { return Mat::Zero(1, 1); };
        nl.dH = [](const Vec&) -> Vec { return Vec::Ones(1); };
        nl.input = [](double u) { return std::tanh(0.5 * u); };
        nl.input_slope = 0.5;
        nl.x_star = Vec::Zero(1);
    } else {
        throw ConfigError("unknown unit model '" + name + "'");
    }
    return nl;
}

std::vector<std::string> catalog_names() {
    return {"example1", "example2", "cubic", "fitzhugh_nagumo", "consensus_tanh"};
}

Vec network_rhs(const NetworkSystem& sys, const Vec& X) {
    const int n = sys.graph.n();
    const int m = sys.unit.m;
    Vec y(n);
    for (int k = 0; k < n; ++k) y(k) = sys.unit.H(X.segment(k * m, m));
    Vec u = Vec::Zero(n);
    for (const auto& e : sys.graph.arcs()) u(e.i) += e.w * (y(e.j) - y(e.i));
    Vec dX(X.size());
    for (int k = 0; k < n; ++k) {
        Vec xk = X.segment(k * m, m);
        double uk = sys.unit.input ? sys.unit.input(u(k)) : u(k);
        Vec f = sys.unit.F(xk) + sys.unit.G(xk) * uk;
        if (!sys.deltaA.empty()) f += sys.deltaA[k] * xk;
        dX.segment(k * m, m) = f;
    }
    return dX;
}

Mat rk4_propagator(const Mat& M, double dt, int substeps) {
    if (substeps < 1) throw Error("substeps must be >= 1");
    const double h = dt / substeps;
    const Eigen::Index N = M.rows();
    Mat hM = h * M;
    Mat P = hM;
    Mat R = Mat::Identity(N, N) + P;
    double fact = 1.0;
    for (int k = 2; k <= 4; ++k) {
        P = P * hM;
        fact *= k;
        R += P / fact;
    }
    Mat Phi = Mat::Identity(N, N);
    for (int s = 0; s < substeps; ++s) Phi = R * Phi;
    return Phi;
}

namespace {

void guard(const Vec& X, long step) {
    if (!X.allFinite()) throw DivergenceError(step, "non-finite state");
    if (X.cwiseAbs().maxCoeff() > 1e8) throw DivergenceError(step, "state magnitude exceeded 1e8");
}

}  // namespace

std::vector<Trajectory> simulate_many(const NetworkSystem& sys, const std::vector<Vec>& X0s, double dt, int steps,
                                      int substeps) {
    if (!(dt > 0)) throw Error("dt must be positive");
    if (substeps < 1) throw Error("substeps must be >= 1");
    if (steps < 0) throw Error("steps must be >= 0");
    const int N = sys.graph.n() * sys.unit.m;
    for (const auto& x : X0s)
        if (x.size() != N) throw Error("initial condition has wrong dimension");
    if (!sys.deltaA.empty() && static_cast<int>(sys.deltaA.size()) != sys.graph.n())
        throw Error("heterogeneity realization size does not match the graph");

    std::vector<Trajectory> out(X0s.size());
    for (auto& tr : out) {
        tr.dt = dt;
        tr.X.resize(N, steps + 1);
    }

    if (sys.unit.linear && !sys.unit.input) {
        Mat M = build_K(*sys.unit.linear, laplacian(sys.graph));
        if (!sys.deltaA.empty()) M += build_delta_K(sys.deltaA);
        Mat Phi = rk4_propagator(M, dt, substeps);
        for (std::size_t r = 0; r < X0s.size(); ++r) {
            Vec X = X0s[r];
            guard(X, 0);
            out[r].X.col(0) = X;
            for (int k = 1; k <= steps; ++k) {
                X = Phi * X;
                guard(X, k);
                out[r].X.col(k) = X;
            }
        }
        return out;
    }

    const double h = dt / substeps;
    for (std::size_t r = 0; r < X0s.size(); ++r) {
        Vec X = X0s[r];
        guard(X, 0);
        out[r].X.col(0) = X;
        for (int k = 1; k <= steps; ++k) {
            for (int s = 0; s < substeps; ++s) {
                Vec k1 = network_rhs(sys, X);
                Vec k2 = network_rhs(sys, X + 0.5 * h * k1);
                Vec k3 = network_rhs(sys, X + 0.5 * h * k2);
                Vec k4 = network_rhs(sys, X + h * k3);
                X += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
            }
            guard(X, k);
            out[r].X.col(k) = X;
        }
    }
    return out;
}

Trajectory simulate(const NetworkSystem& sys, const Vec& X0, double dt, int steps, int substeps) {
    return simulate_many(sys, {X0}, dt, steps, substeps).front();
}

CVec eigenvalues(const Mat& M) {
    if (M.size() == 0) return CVec();
    Eigen::EigenSolver<Mat> es(M, false);
    return es.eigenvalues();
}

}  // namespace specnet
