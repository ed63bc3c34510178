#pragma once

#include <limits>
#include <string>
#include <vector>

#include "specnet/common.hpp"
#include "specnet/dynamics.hpp"

namespace specnet {

// g(mu) = 1 / (C^T (A - mu I)^{-1} B), and 0 when mu lies within sigmaA_tol of sigma(A)
cplx g_map(cplx mu, const LinearUnit& unit, double sigmaA_tol = 1e-6);

struct CtrbObsv {
    bool controllable = false;
    bool observable = false;
};
CtrbObsv check_ctrb_obsv(const LinearUnit& unit);

// Delta(mu) = -C^T R^2 B / (C^T R B)^2 with R = (A - mu I)^{-1}
cplx sensitivity(cplx mu, const LinearUnit& unit);
// dg/dmu from the rational form g = p / (p - p~), p = det(A - mu I),
// p~ = det(A - BC^T - mu I); finite on sigma(A)
cplx sensitivity_rational(cplx mu, const LinearUnit& unit);

struct RecoveredEntry {
    cplx mu;
    cplx lambda;
    cplx delta;
    bool degenerate = false;  // g_map failed; lambda is NaN
};

struct RecoveredGroup {
    cplx lambda_bar;
    std::vector<int> members;  // indices into raw
};

struct RecoveredSpectrum {
    std::vector<RecoveredEntry> raw;
    std::vector<RecoveredGroup> aggregated;  // sorted by real part, then imaginary part
    double group_tol = 0;
    std::vector<std::string> warnings;
};

struct RecoveryOptions {
    double group_tol = std::numeric_limits<double>::quiet_NaN();  // NaN: 1e-2 * spread
    double sigmaA_tol = 1e-6;
    bool project_real = false;  // for graphs declared undirected
};

RecoveredSpectrum recover_spectrum(const std::vector<cplx>& mu, const LinearUnit& unit,
                                   const RecoveryOptions& opt = {});

// weighted average of Eq. (12) form: sum(l_k / |d_k|^2) / sum(1 / |d_k|^2)
cplx weighted_average(const std::vector<cplx>& lambdas, const std::vector<cplx>& deltas);

}  // namespace specnet
