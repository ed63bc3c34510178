#pragma once

#include <limits>
#include <string>
#include <vector>

#include "specnet/common.hpp"
#include "specnet/observation.hpp"

namespace specnet {

struct DmdResult {
    CVec discrete_eigs;    // nu_k
    CVec continuous_eigs;  // mu_k = log(nu_k) / dt, principal branch
    CMat modes;            // q1 x rank_used, column k is phi_k
    Vec singular_values;   // all singular values of X
    int rank_used = 0;
    double dt = 0;
    std::vector<std::string> warnings;
};

// Truncates to sigma_i > rank_tol * sigma_1; rank_tol = 0 keeps every
// nonzero singular value.
DmdResult dmd(const DataMatrix& D, double rank_tol = 1e-10);
DmdResult dmd(const Mat& X, const Mat& Y, double dt, double rank_tol = 1e-10);

// least-squares amplitudes b with z_0 = Phi b
CVec dmd_amplitudes(const DmdResult& r, const Vec& z0);
// sum_k phi_k nu_k^j b_k
CVec dmd_reconstruct(const DmdResult& r, const CVec& amplitudes, int j);

struct OutlierPolicy {
    double re_max = 0.05;
    double re_min = -50.0;
    // NaN means 0.95 * pi / dt
    double im_max = std::numeric_limits<double>::quiet_NaN();
};

std::vector<cplx> filter_outliers(const std::vector<cplx>& eigs, const OutlierPolicy& policy, double dt);

std::vector<cplx> to_vector(const CVec& v);

}  // namespace specnet
