#include "specnet/common.hpp"

namespace specnet {

int numerical_rank(const Mat& M, double tol) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > tol * s(0)) ++r;
    return r;
}

}  // namespace specnet
