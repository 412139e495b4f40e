// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef LAPWAVE_TYPES_HPP
#define LAPWAVE_TYPES_HPP

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace lapwave
{

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Mat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Every failure mode has its own code so the CLI can map it to a distinct exit status.
enum class ErrorCode
{
  invalid_argument = 2,
  config = 3,
  io = 4,
  dimension_mismatch = 5,
  support = 6,
  singular_cell_problem = 10,
  contour_configuration = 11,
  assumption3 = 12,
  sigma_admissibility = 13,
  eigensolver = 14,
  standing_wave = 15,
  classification = 16,
  trapped_mode = 17,
  division_degeneracy = 18,
  enlarge_R = 19,
  no_convergence = 20,
  missing_artifact = 21
};

const char *ErrorName(ErrorCode code);

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string &msg)
    : std::runtime_error(std::string(ErrorName(code)) + ": " + msg), code_(code)
  {
  }
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

enum class BoundaryCondition
{
  neumann,
  dirichlet
};

const char *ToString(BoundaryCondition bc);
BoundaryCondition ParseBoundaryCondition(const std::string &s);

}  // namespace lapwave

#endif  // LAPWAVE_TYPES_HPP
