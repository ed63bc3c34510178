#include "specnet/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace specnet {

namespace {

CVec spectrum_of(const Mat& M) {
    Eigen::EigenSolver<Mat> es(M, false);
    return es.eigenvalues();
}

double distance_to_spectrum(cplx mu, const CVec& s) {
    double d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < s.size(); ++i) d = std::min(d, std::abs(mu - s(i)));
    return d;
}

// p(mu) = prod(a_i - mu) and its derivative
std::pair<cplx, cplx> char_poly(const CVec& roots, cplx mu) {
    cplx p = 1.0, dp = 0.0;
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        dp = dp * (roots(i) - mu) - p;
        p *= roots(i) - mu;
    }
    return {p, dp};
}

}  // namespace

cplx g_map(cplx mu, const LinearUnit& unit, double sigmaA_tol) {
    unit.validate();
    if (distance_to_spectrum(mu, spectrum_of(unit.A)) <= sigmaA_tol) return 0.0;
    const int m = unit.m();
    CMat M = unit.A.cast<cplx>() - mu * CMat::Identity(m, m);
    CVec x = M.fullPivLu().solve(unit.B.cast<cplx>());
    cplx cx = unit.C.cast<cplx>().dot(x);  // dot conjugates the left operand; C is real
    if (cx == cplx(0.0)) throw DegenerateError("resolvent observation C^T (A - mu I)^{-1} B vanishes");
    return 1.0 / cx;
}

CtrbObsv check_ctrb_obsv(const LinearUnit& unit) {
    unit.validate();
    const int m = unit.m();
    Mat Kc(m, m), Ko(m, m);
    Vec b = unit.B, c = unit.C;
    Mat At = unit.A.transpose();
    for (int k = 0; k < m; ++k) {
        Kc.col(k) = b;
        Ko.col(k) = c;
        b = unit.A * b;
        c = At * c;
    }
    return {numerical_rank(Kc, 1e-10) == m, numerical_rank(Ko, 1e-10) == m};
}

cplx sensitivity(cplx mu, const LinearUnit& unit) {
    unit.validate();
    const int m = unit.m();
    double scale = 1.0 + unit.A.cwiseAbs().maxCoeff();
    if (distance_to_spectrum(mu, spectrum_of(unit.A)) <= 1e-12 * scale)
        throw DegenerateError("sensitivity: mu lies on sigma(A), resolvent singular");
    CMat M = unit.A.cast<cplx>() - mu * CMat::Identity(m, m);
    auto lu = M.fullPivLu();
    CVec Bc = unit.B.cast<cplx>();
    CVec Cc = unit.C.cast<cplx>();
    CVec x1 = lu.solve(Bc);
    CVec x2 = lu.solve(x1);
    cplx g1 = Cc.dot(x1), g2 = Cc.dot(x2);
    if (g1 == cplx(0.0)) throw DegenerateError("sensitivity: C^T R B vanishes");
    return -g2 / (g1 * g1);
}

cplx sensitivity_rational(cplx mu, const LinearUnit& unit) {
    unit.validate();
    CVec a = spectrum_of(unit.A);
    CVec at = spectrum_of(unit.A - unit.B * unit.C.transpose());
    auto [p, dp] = char_poly(a, mu);
    auto [pt, dpt] = char_poly(at, mu);
    cplx q = p - pt, dq = dp - dpt;
    if (q == cplx(0.0)) throw DegenerateError("sensitivity: p - p~ vanishes");
    return (dp * q - p * dq) / (q * q);
}

cplx weighted_average(const std::vector<cplx>& lambdas, const std::vector<cplx>& deltas) {
    if (lambdas.empty() || lambdas.size() != deltas.size()) throw Error("weighted_average: size mismatch");
    cplx num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        double d2 = std::norm(deltas[k]);
        double w = d2 > 1e-300 ? 1.0 / d2 : 1e300;
        num += w * lambdas[k];
        den += w;
    }
    return num / den;
}

RecoveredSpectrum recover_spectrum(const std::vector<cplx>& mu, const LinearUnit& unit, const RecoveryOptions& opt) {
    unit.validate();
    RecoveredSpectrum out;
    auto cs = check_ctrb_obsv(unit);
    if (!cs.controllable || !cs.observable)
        out.warnings.push_back("unit is not controllable/observable; recovery may be partial");

    const CVec sigmaA = spectrum_of(unit.A);
    for (const auto& z : mu) {
        RecoveredEntry e;
        e.mu = z;
        try {
            e.lambda = g_map(z, unit, opt.sigmaA_tol);
            if (distance_to_spectrum(z, sigmaA) <= opt.sigmaA_tol) e.delta = sensitivity_rational(z, unit);
            else e.delta = sensitivity(z, unit);
        } catch (const DegenerateError& ex) {
            e.degenerate = true;
            e.lambda = cplx(std::nan(""), std::nan(""));
            out.warnings.push_back(std::string("entry flagged: ") + ex.what());
        }
        out.raw.push_back(e);
    }

    std::vector<int> live;
    for (int i = 0; i < static_cast<int>(out.raw.size()); ++i)
        if (!out.raw[i].degenerate) live.push_back(i);

    double tol = opt.group_tol;
    if (std::isnan(tol)) {
        double spread = 0.0;
        for (std::size_t a = 0; a < live.size(); ++a)
            for (std::size_t b = a + 1; b < live.size(); ++b)
                spread = std::max(spread, std::abs(out.raw[live[a]].lambda - out.raw[live[b]].lambda));
        tol = 1e-2 * spread;
    }
    out.group_tol = tol;

    // single-linkage agglomeration, closest pairs first, at most m per group
    struct Pair {
        double d;
        int a, b;
    };
    std::vector<Pair> pairs;
    for (std::size_t a = 0; a < live.size(); ++a)
        for (std::size_t b = a + 1; b < live.size(); ++b) {
            double d = std::abs(out.raw[live[a]].lambda - out.raw[live[b]].lambda);
            if (d <= tol) pairs.push_back({d, live[a], live[b]});
        }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.d < y.d; });

    std::vector<int> parent(out.raw.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<int> size(out.raw.size(), 1);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    const int cap = unit.m();
    for (const auto& pr : pairs) {
        int ra = find(pr.a), rb = find(pr.b);
        if (ra == rb || size[ra] + size[rb] > cap) continue;
        if (ra > rb) std::swap(ra, rb);
        parent[rb] = ra;
        size[ra] += size[rb];
    }

    std::vector<std::vector<int>> groups(out.raw.size());
    for (int i : live) groups[find(i)].push_back(i);
    for (auto& members : groups) {
        if (members.empty()) continue;
        std::vector<cplx> l, d;
        for (int i : members) {
            l.push_back(out.raw[i].lambda);
            d.push_back(out.raw[i].delta);
        }
        RecoveredGroup g;
        g.members = members;
        g.lambda_bar = weighted_average(l, d);
        if (opt.project_real) {
            if (std::abs(g.lambda_bar.imag()) <= std::max(tol, 1e-12)) g.lambda_bar = g.lambda_bar.real();
            else out.warnings.push_back("complex eigenvalue recovered for an undirected graph");
        }
        out.aggregated.push_back(std::move(g));
    }
    std::stable_sort(out.aggregated.begin(), out.aggregated.end(), [](const RecoveredGroup& x, const RecoveredGroup& y) {
        if (x.lambda_bar.real() != y.lambda_bar.real()) return x.lambda_bar.real() < y.lambda_bar.real();
        return x.lambda_bar.imag() < y.lambda_bar.imag();
    });
    return out;
}

}  // namespace specnet
