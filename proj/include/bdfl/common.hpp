#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace bdfl {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using SparseCMatrix = Eigen::SparseMatrix<cplx>;
using Index = Eigen::Index;

/// One-body state u in complex d-space.
using OneBodyVector = CVector;

// Tolerance ladder shared by every module.
inline constexpr double kExactTol = 1e-12;    // exact algebraic identities
inline constexpr double kChainedTol = 1e-10;  // chained linear algebra
inline constexpr double kSigmaFactor = 3.0;   // Monte-Carlo assertions

/// Raised for precondition violations and numerical failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact integer arithmetic would leave the int64 range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

}  // namespace bdfl
