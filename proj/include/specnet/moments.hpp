#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specnet/common.hpp"
#include "specnet/dynamics.hpp"
#include "specnet/graph.hpp"

namespace specnet {

struct AreaMoments {
    double A = 0;    // area
    double Ix = 0;   // centroid x coordinate
    double Ixx = 0;  // integral of y^2 over the hull
    double Iyy = 0;  // integral of x^2 over the hull
};

// monotone chain; counterclockwise, collinear points dropped
std::vector<cplx> convex_hull(const std::vector<cplx>& points);
AreaMoments hull_area_moments(const std::vector<cplx>& points);

struct EigenvalueCluster {
    std::vector<cplx> members;
    std::vector<cplx> hull;
    AreaMoments area_moments;
    cplx centroid;
};

struct ClusterOptions {
    int restarts = 50;
    bool merge = true;
    bool trim = false;  // drop members beyond trim_factor * median distance to centroid
    double trim_factor = 3.0;
};

std::vector<EigenvalueCluster> cluster_eigenvalues(const std::vector<cplx>& eigs, int n_c, std::uint64_t seed,
                                                   const ClusterOptions& opt = {});

// clusters with area below this fraction of their squared diameter use the
// discrete averages
constexpr double kDegenerateAreaRatio = 1e-12;

std::pair<double, double> moments_of_K(const std::vector<EigenvalueCluster>& clusters);

// M_k(L) for k = 0..k from M_k(K) for k = 0..k (MK[0] is ignored)
std::vector<double> laplacian_moment_recursion(const std::vector<double>& MK, const LinearUnit& unit, int k);

std::pair<double, double> laplacian_moments_identical(double M1K, double M2K, const LinearUnit& unit);
std::pair<double, double> laplacian_moments_hetero(double M1KdK, double M2KdK, const LinearUnit& unit, double s);
// A_measured stands in for A in tr(A) and tr(A^2); unit supplies B, C and
// the nominal A of the cross term
std::pair<double, double> laplacian_moments_hetero_unknown_A(double M1KdK, double M2KdK, const Mat& A_measured,
                                                            const LinearUnit& unit);
std::pair<double, double> laplacian_moments_two_population(double M1KdK, double M2KdK, const LinearUnit& unit,
                                                           const Mat& deltaA, double s);
std::pair<double, double> unweighted_moments(double M1L, double M2L, double r_w, double s_w);

enum class MomentVariant { identical, hetero_known_A, hetero_unknown_A, two_population };
std::string to_string(MomentVariant v);
MomentVariant moment_variant_from_string(const std::string& s);

struct MomentEstimates {
    double M1K = 0, M2K = 0;
    double M1L = 0, M2L = 0;
    MomentVariant variant = MomentVariant::identical;
    std::optional<std::pair<double, double>> unweighted;  // (M1Lbar, M2Lbar)
    DegreeMomentReport degree_report;
    std::optional<DegreeMomentReport> unweighted_degree_report;
};

}  // namespace specnet
