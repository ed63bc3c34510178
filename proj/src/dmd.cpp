#include "specnet/dmd.hpp"

#include <cmath>

namespace specnet {

DmdResult dmd(const DataMatrix& D, double rank_tol) {
    if (D.Z.cols() < 2) throw DegenerateError("DMD needs at least two snapshot columns");
    const auto q2 = D.Z.cols() - 1;
    return dmd(D.Z.leftCols(q2), D.Z.rightCols(q2), D.dt, rank_tol);
}

DmdResult dmd(const Mat& X, const Mat& Y, double dt, double rank_tol) {
    if (X.rows() != Y.rows() || X.cols() != Y.cols()) throw Error("DMD: X and Y differ in shape");
    if (!(dt > 0)) throw Error("DMD: dt must be positive");
    if (X.size() == 0 || X.cwiseAbs().maxCoeff() == 0.0) throw DegenerateError("DMD: all-zero data matrix");

    Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    DmdResult r;
    r.dt = dt;
    r.singular_values = svd.singularValues();
    const double s1 = r.singular_values(0);
    int keep = 0;
    for (Eigen::Index i = 0; i < r.singular_values.size(); ++i)
        if (r.singular_values(i) > rank_tol * s1 && r.singular_values(i) > 0) ++keep;
    if (keep < 1) throw DegenerateError("DMD: no singular value above the rank tolerance");

    Mat U = svd.matrixU().leftCols(keep);
    Mat V = svd.matrixV().leftCols(keep);
    Vec sinv = r.singular_values.head(keep).cwiseInverse();
    Mat Tt = U.transpose() * Y * V * sinv.asDiagonal();

    Eigen::EigenSolver<Mat> es(Tt, true);
    CVec nu = es.eigenvalues();
    CMat W = es.eigenvectors();

    std::vector<Eigen::Index> ok;
    for (Eigen::Index k = 0; k < nu.size(); ++k) {
        if (std::abs(nu(k)) == 0.0) {
            r.warnings.push_back("dropped nilpotent direction (nu = 0)");
            continue;
        }
        ok.push_back(k);
    }
    r.rank_used = keep;
    r.discrete_eigs.resize(ok.size());
    r.continuous_eigs.resize(ok.size());
    r.modes.resize(U.rows(), ok.size());
    CMat Uc = U.cast<cplx>();
    for (std::size_t i = 0; i < ok.size(); ++i) {
        cplx v = nu(ok[i]);
        r.discrete_eigs(i) = v;
        r.continuous_eigs(i) = std::log(v) / dt;
        r.modes.col(i) = Uc * W.col(ok[i]);
    }
    return r;
}

CVec dmd_amplitudes(const DmdResult& r, const Vec& z0) {
    return r.modes.completeOrthogonalDecomposition().solve(z0.cast<cplx>());
}

CVec dmd_reconstruct(const DmdResult& r, const CVec& b, int j) {
    CVec scaled(b.size());
    for (Eigen::Index k = 0; k < b.size(); ++k) scaled(k) = std::pow(r.discrete_eigs(k), j) * b(k);
    return r.modes * scaled;
}

std::vector<cplx> filter_outliers(const std::vector<cplx>& eigs, const OutlierPolicy& policy, double dt) {
    double im_max = policy.im_max;
    if (std::isnan(im_max)) im_max = 0.95 * M_PI / dt;
    std::vector<cplx> out;
    for (const auto& mu : eigs) {
        if (!std::isfinite(mu.real()) || !std::isfinite(mu.imag())) continue;
        if (mu.real() > policy.re_max || mu.real() < policy.re_min) continue;
        if (std::abs(mu.imag()) > im_max) continue;
        out.push_back(mu);
    }
    return out;
}

std::vector<cplx> to_vector(const CVec& v) {
    return std::vector<cplx>(v.data(), v.data() + v.size());
}

}  // namespace specnet
