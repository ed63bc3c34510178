#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace specnet {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    int line;
    ParseError(int line_no, const std::string& msg)
        : Error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

// Newton or pairing loops that ran out of iterations
struct ConvergenceError : Error {
    using Error::Error;
};

struct DivergenceError : Error {
    long step;
    DivergenceError(long s, const std::string& msg)
        : Error("diverged at step " + std::to_string(s) + ": " + msg), step(s) {}
};

// singular resolvent, C^T B = 0, empty data and similar
struct DegenerateError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// pipeline failures carry the Alg. stage that raised them
struct StageError : Error {
    std::string stage;
    StageError(std::string st, const std::string& msg)
        : Error("[" + st + "] " + msg), stage(std::move(st)) {}
};

// numerical rank with relative tolerance tol * sigma_max
int numerical_rank(const Mat& M, double tol = 1e-10);

}  // namespace specnet
