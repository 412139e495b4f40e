// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lapwave/sparse_lu.hpp"

#include <cmath>
#include <string>
#include <vector>
#include <suitesparse/umfpack.h>

namespace lapwave
{

namespace
{

const double *Real(const SpMat &A)
{
  return reinterpret_cast<const double *>(A.valuePtr());
}

void DefaultControl(double *control)
{
  umfpack_zi_defaults(control);
  // AMD ordering measured fastest on the cell matrices.
  control[UMFPACK_ORDERING] = UMFPACK_ORDERING_AMD;
}

void Check(int status, const char *what)
{
  if (status == UMFPACK_WARNING_singular_matrix)
  {
    throw Error(ErrorCode::singular_cell_problem, std::string(what) + ": matrix is singular");
  }
  if (status != UMFPACK_OK)
  {
    throw Error(ErrorCode::singular_cell_problem,
                std::string(what) + " failed with UMFPACK status " + std::to_string(status));
  }
}

}  // namespace

std::shared_ptr<void> SparseLU::Analyze(const SpMat &A)
{
  if (!A.isCompressed())
  {
    throw Error(ErrorCode::invalid_argument, "sparse matrix must be compressed");
  }
  double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
  DefaultControl(control);
  void *symbolic = nullptr;
  const int status =
      umfpack_zi_symbolic(static_cast<int>(A.rows()), static_cast<int>(A.cols()),
                          A.outerIndexPtr(), A.innerIndexPtr(), Real(A), nullptr, &symbolic,
                          control, info);
  Check(status, "symbolic analysis");
  return std::shared_ptr<void>(symbolic, [](void *p) { umfpack_zi_free_symbolic(&p); });
}

void SparseLU::Factor(const SpMat &A, std::shared_ptr<void> symbolic)
{
  A_ = A;
  A_.makeCompressed();
  n_ = static_cast<int>(A_.rows());
  symbolic_ = symbolic ? std::move(symbolic) : Analyze(A_);
  double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
  DefaultControl(control);
  void *numeric = nullptr;
  const int status = umfpack_zi_numeric(A_.outerIndexPtr(), A_.innerIndexPtr(), Real(A_),
                                        nullptr, symbolic_.get(), &numeric, control, info);
  if (numeric && status != UMFPACK_OK)
  {
    umfpack_zi_free_numeric(&numeric);
  }
  Check(status, "numeric factorization");
  numeric_ = std::shared_ptr<void>(numeric, [](void *p) { umfpack_zi_free_numeric(&p); });
  pivot_ratio_ = info[UMFPACK_RCOND];
  memory_bytes_ = info[UMFPACK_NUMERIC_SIZE] * info[UMFPACK_SIZE_OF_UNIT];
}

void SparseLU::Solve(const cplx *b, cplx *x, Op op) const
{
  if (!numeric_)
  {
    throw Error(ErrorCode::invalid_argument, "solve before factorization");
  }
  const int sys = (op == Op::normal) ? UMFPACK_A : (op == Op::transpose ? UMFPACK_Aat : UMFPACK_At);
  double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
  DefaultControl(control);
  const int status = umfpack_zi_solve(sys, A_.outerIndexPtr(), A_.innerIndexPtr(), Real(A_),
                                      nullptr, reinterpret_cast<double *>(x), nullptr,
                                      reinterpret_cast<const double *>(b), nullptr,
                                      numeric_.get(), control, info);
  Check(status, "triangular solve");
}

Vec SparseLU::Solve(const Vec &b, Op op) const
{
  if (b.size() != n_)
  {
    throw Error(ErrorCode::dimension_mismatch, "right-hand side has wrong length");
  }
  Vec x(n_);
  Solve(b.data(), x.data(), op);
  return x;
}

double SparseLU::ReciprocalCondition() const
{
  if (n_ == 0)
  {
    return 1.0;
  }
  double norm_a = 0.0;
  for (int j = 0; j < A_.outerSize(); j++)
  {
    double col = 0.0;
    for (SpMat::InnerIterator it(A_, j); it; ++it)
    {
      col += std::abs(it.value());
    }
    norm_a = std::max(norm_a, col);
  }
  // Higham's variant of Hager's method for ||A^{-1}||_1.
  Vec x = Vec::Constant(n_, cplx(1.0 / n_, 0.0));
  double est = 0.0;
  int jlast = -1;
  for (int iter = 0; iter < 5; iter++)
  {
    Vec y = Solve(x);
    const double ny = y.lpNorm<1>();
    if (iter > 0 && ny <= est)
    {
      break;
    }
    est = ny;
    Vec xi(n_);
    for (int i = 0; i < n_; i++)
    {
      const double a = std::abs(y[i]);
      xi[i] = (a > 0.0) ? y[i] / a : cplx(1.0, 0.0);
    }
    Vec z = Solve(xi, Op::adjoint);
    int j = 0;
    z.cwiseAbs().maxCoeff(&j);
    if (j == jlast || std::abs(z[j]) <= std::real(z.dot(x)))
    {
      break;
    }
    jlast = j;
    x.setZero();
    x[j] = 1.0;
  }
  Vec alt(n_);
  for (int i = 0; i < n_; i++)
  {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    alt[i] = sign * (1.0 + static_cast<double>(i) / std::max(1, n_ - 1));
  }
  const double alt_est = 2.0 * Solve(alt).lpNorm<1>() / (3.0 * n_);
  est = std::max(est, alt_est);
  if (est == 0.0 || norm_a == 0.0)
  {
    return 0.0;
  }
  return 1.0 / (norm_a * est);
}

}  // namespace lapwave
