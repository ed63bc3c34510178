#include "specnet/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "specnet/random.hpp"

namespace specnet {

namespace {

double cross(cplx o, cplx a, cplx b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

double diameter2(const std::vector<cplx>& pts) {
    double d = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, std::norm(pts[i] - pts[j]));
    return d;
}

void require_cb(const LinearUnit& unit) {
    unit.validate();
    if (std::abs(unit.C.dot(unit.B)) <= 1e-12) throw DegenerateError("moment inversion requires C^T B != 0");
}

}  // namespace

std::vector<cplx> convex_hull(const std::vector<cplx>& points) {
    std::vector<cplx> p = points;
    std::sort(p.begin(), p.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3) return p;
    std::vector<cplx> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    h.resize(k - 1);
    return h;
}

AreaMoments hull_area_moments(const std::vector<cplx>& points) {
    if (points.empty()) throw Error("hull_area_moments: no points");
    auto h = convex_hull(points);
    AreaMoments am;
    if (h.size() < 3) {
        // zero-area hull: centroid of the distinct points, no area
        double sx = 0;
        for (auto z : h) sx += z.real();
        am.Ix = sx / h.size();
        return am;
    }
    double a2 = 0, cx = 0, ixx = 0, iyy = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        double x0 = h[i].real(), y0 = h[i].imag();
        double x1 = h[(i + 1) % h.size()].real(), y1 = h[(i + 1) % h.size()].imag();
        double cr = x0 * y1 - x1 * y0;
        a2 += cr;
        cx += (x0 + x1) * cr;
        iyy += (x0 * x0 + x0 * x1 + x1 * x1) * cr;
        ixx += (y0 * y0 + y0 * y1 + y1 * y1) * cr;
    }
    am.A = 0.5 * a2;
    am.Ix = cx / (3.0 * a2);
    am.Ixx = ixx / 12.0;
    am.Iyy = iyy / 12.0;
    return am;
}

namespace {

struct KMeansFit {
    std::vector<int> label;
    std::vector<cplx> centre;
    double inertia = std::numeric_limits<double>::infinity();
};

KMeansFit kmeans_once(const std::vector<cplx>& x, int k, Rng& rng) {
    const std::size_t n = x.size();
    KMeansFit f;
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    f.centre.push_back(x[first(rng)]);
    std::vector<double> d2(n);
    while (static_cast<int>(f.centre.size()) < k) {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (auto c : f.centre) best = std::min(best, std::norm(x[i] - c));
            d2[i] = best;
            total += best;
        }
        if (total <= 0) {
            f.centre.push_back(x[first(rng)]);
            continue;
        }
        std::discrete_distribution<std::size_t> pick(d2.begin(), d2.end());
        f.centre.push_back(x[pick(rng)]);
    }
    f.label.assign(n, 0);
    for (int it = 0; it < 300; ++it) {
        bool changed = it == 0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::norm(x[i] - f.centre[0]);
            for (int c = 1; c < k; ++c) {
                double d = std::norm(x[i] - f.centre[c]);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (best != f.label[i]) {
                f.label[i] = best;
                changed = true;
            }
        }
        std::vector<cplx> sum(k, 0.0);
        std::vector<int> cnt(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sum[f.label[i]] += x[i];
            ++cnt[f.label[i]];
        }
        for (int c = 0; c < k; ++c)
            if (cnt[c] > 0) f.centre[c] = sum[c] / static_cast<double>(cnt[c]);
        if (!changed) break;
    }
    f.inertia = 0;
    for (std::size_t i = 0; i < n; ++i) f.inertia += std::norm(x[i] - f.centre[f.label[i]]);
    return f;
}

EigenvalueCluster make_cluster(std::vector<cplx> members) {
    EigenvalueCluster c;
    c.members = std::move(members);
    cplx s = 0;
    for (auto z : c.members) s += z;
    c.centroid = s / static_cast<double>(c.members.size());
    c.hull = convex_hull(c.members);
    c.area_moments = hull_area_moments(c.members);
    return c;
}

double mean_radius(const EigenvalueCluster& c) {
    double r = 0;
    for (auto z : c.members) r += std::abs(z - c.centroid);
    return r / c.members.size();
}

}  // namespace

std::vector<EigenvalueCluster> cluster_eigenvalues(const std::vector<cplx>& eigs, int n_c, std::uint64_t seed,
                                                   const ClusterOptions& opt) {
    if (eigs.empty()) throw Error("cluster_eigenvalues: no eigenvalues");
    if (n_c < 1) throw Error("cluster_eigenvalues: n_c must be >= 1");
    if (n_c > static_cast<int>(eigs.size()))
        throw Error("cluster_eigenvalues: n_c exceeds the number of eigenvalues");
    Rng rng(seed);
    KMeansFit best;
    for (int r = 0; r < std::max(1, opt.restarts); ++r) {
        auto f = kmeans_once(eigs, n_c, rng);
        if (f.inertia < best.inertia) best = std::move(f);
    }
    std::vector<std::vector<cplx>> groups(n_c);
    for (std::size_t i = 0; i < eigs.size(); ++i) groups[best.label[i]].push_back(eigs[i]);

    std::vector<EigenvalueCluster> clusters;
    for (auto& g : groups)
        if (!g.empty()) clusters.push_back(make_cluster(std::move(g)));

    if (opt.merge) {
        bool merged = true;
        while (merged && clusters.size() > 1) {
            merged = false;
            for (std::size_t a = 0; a < clusters.size() && !merged; ++a)
                for (std::size_t b = a + 1; b < clusters.size() && !merged; ++b) {
                    double d = std::abs(clusters[a].centroid - clusters[b].centroid);
                    double rad = 0.5 * (mean_radius(clusters[a]) + mean_radius(clusters[b]));
                    if (d < rad || d == 0.0) {
                        auto m = clusters[a].members;
                        m.insert(m.end(), clusters[b].members.begin(), clusters[b].members.end());
                        clusters[a] = make_cluster(std::move(m));
                        clusters.erase(clusters.begin() + b);
                        merged = true;
                    }
                }
        }
    }

    if (opt.trim) {
        for (auto& c : clusters) {
            std::vector<double> d;
            for (auto z : c.members) d.push_back(std::abs(z - c.centroid));
            auto sorted = d;
            std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
            double med = sorted[sorted.size() / 2];
            if (med <= 0) continue;
            std::vector<cplx> kept;
            for (std::size_t i = 0; i < d.size(); ++i)
                if (d[i] <= opt.trim_factor * med) kept.push_back(c.members[i]);
            if (!kept.empty() && kept.size() != c.members.size()) c = make_cluster(std::move(kept));
        }
    }
    std::sort(clusters.begin(), clusters.end(), [](const EigenvalueCluster& x, const EigenvalueCluster& y) {
        return x.centroid.real() < y.centroid.real();
    });
    return clusters;
}

std::pair<double, double> moments_of_K(const std::vector<EigenvalueCluster>& clusters) {
    if (clusters.empty()) throw Error("moments_of_K: no clusters");
    double m1 = 0, m2 = 0;
    for (const auto& c : clusters) {
        const auto& am = c.area_moments;
        if (am.A > kDegenerateAreaRatio * std::max(diameter2(c.members), 1e-300)) {
            m1 += am.Ix;
            m2 += (am.Iyy - am.Ixx) / am.A;
        } else {
            double s1 = 0, s2 = 0;
            for (auto z : c.members) {
                s1 += z.real();
                s2 += (z * z).real();
            }
            m1 += s1 / c.members.size();
            m2 += s2 / c.members.size();
        }
    }
    return {m1 / clusters.size(), m2 / clusters.size()};
}

std::vector<double> laplacian_moment_recursion(const std::vector<double>& MK, const LinearUnit& unit, int k) {
    require_cb(unit);
    if (k < 1 || static_cast<int>(MK.size()) < k + 1) throw Error("recursion needs M_1..M_k of K");
    const int m = unit.m();
    const double cb = unit.C.dot(unit.B);
    const Mat BC = unit.B * unit.C.transpose();
    // W[j] = sum of all length-kk words in A and BC^T with j factors of BC^T.
    // A and BC^T need not commute, so tr(W[j]) replaces binom(kk, j) tr(A^{kk-j} (BC^T)^j);
    // the two agree when m = 1 or kk <= 3.
    std::vector<Mat> W(1, Mat::Identity(m, m));
    std::vector<double> ML(k + 1, 0.0);
    ML[0] = 1.0;
    for (int kk = 1; kk <= k; ++kk) {
        std::vector<Mat> next(kk + 1, Mat::Zero(m, m));
        for (int j = 0; j < kk; ++j) {
            next[j] += W[j] * unit.A;
            next[j + 1] += W[j] * BC;
        }
        W = std::move(next);
        double s = m * MK[kk];
        for (int j = 0; j < kk; ++j) s += (j % 2 == 0 ? -1.0 : 1.0) * ML[j] * W[j].trace();
        ML[kk] = (kk % 2 == 0 ? 1.0 : -1.0) / std::pow(cb, kk) * s;
    }
    return ML;
}

std::pair<double, double> laplacian_moments_identical(double M1K, double M2K, const LinearUnit& unit) {
    return laplacian_moments_hetero(M1K, M2K, unit, 0.0);
}

std::pair<double, double> laplacian_moments_hetero(double M1KdK, double M2KdK, const LinearUnit& unit, double s) {
    require_cb(unit);
    if (s < 0) throw Error("dynamics std dev must be >= 0");
    const int m = unit.m();
    const double cb = unit.C.dot(unit.B);
    const double trA = unit.A.trace();
    const double trA2 = (unit.A * unit.A).trace();
    const double trABC = (unit.A * unit.B * unit.C.transpose()).trace();
    double M1 = (-m * M1KdK + trA) / cb;
    double M2 = (m * M2KdK - m * s * s - trA2 + 2 * M1 * trABC) / (cb * cb);
    return {M1, M2};
}

std::pair<double, double> laplacian_moments_hetero_unknown_A(double M1KdK, double M2KdK, const Mat& A_measured,
                                                            const LinearUnit& unit) {
    require_cb(unit);
    const int m = unit.m();
    if (A_measured.rows() != m || A_measured.cols() != m) throw Error("measured A must be m x m");
    const double cb = unit.C.dot(unit.B);
    const double trAm = A_measured.trace();
    const double trAm2 = (A_measured * A_measured).trace();
    const double trABC = (unit.A * unit.B * unit.C.transpose()).trace();
    double M1 = (-m * M1KdK + trAm) / cb;
    double M2 = (m * M2KdK - trAm2 + 2 * M1 * trABC) / (cb * cb);
    return {M1, M2};
}

std::pair<double, double> laplacian_moments_two_population(double M1KdK, double M2KdK, const LinearUnit& unit,
                                                           const Mat& deltaA, double s) {
    require_cb(unit);
    const int m = unit.m();
    if (deltaA.rows() != m || deltaA.cols() != m) throw Error("deltaA must be m x m");
    const double cb = unit.C.dot(unit.B);
    const double trA = unit.A.trace();
    const double trA2 = (unit.A * unit.A).trace();
    const double trABC = (unit.A * unit.B * unit.C.transpose()).trace();
    const double trdA2 = (deltaA * deltaA).trace();
    double M1 = (-m * M1KdK + trA) / cb;
    // E[M2(K + dK)] = M2(K) + s^2 tr(dA^2) / m, so m * M2 carries s^2 tr(dA^2)
    double M2 = (m * M2KdK - s * s * trdA2 - trA2 + 2 * M1 * trABC) / (cb * cb);
    return {M1, M2};
}

std::pair<double, double> unweighted_moments(double M1L, double M2L, double r_w, double s_w) {
    if (!(r_w > 0)) throw Error("weight mean r_w must be positive");
    return {M1L / r_w, M2L / (r_w * r_w) - s_w * s_w * M1L / (r_w * r_w * r_w)};
}

std::string to_string(MomentVariant v) {
    switch (v) {
        case MomentVariant::identical: return "identical";
        case MomentVariant::hetero_known_A: return "hetero_known_A";
        case MomentVariant::hetero_unknown_A: return "hetero_unknown_A";
        case MomentVariant::two_population: return "two_population";
    }
    return "identical";
}

MomentVariant moment_variant_from_string(const std::string& s) {
    if (s == "identical") return MomentVariant::identical;
    if (s == "hetero_known_A") return MomentVariant::hetero_known_A;
    if (s == "hetero_unknown_A") return MomentVariant::hetero_unknown_A;
    if (s == "two_population") return MomentVariant::two_population;
    throw ConfigError("unknown moment variant '" + s + "'");
}

}  // namespace specnet
