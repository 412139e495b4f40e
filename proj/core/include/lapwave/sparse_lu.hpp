// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef LAPWAVE_SPARSE_LU_HPP
#define LAPWAVE_SPARSE_LU_HPP

#include <memory>
#include "lapwave/types.hpp"

namespace lapwave
{

// Thin RAII wrapper over UMFPACK for complex column-compressed matrices. The symbolic
// analysis can be shared between factorizations of matrices with one sparsity pattern.
class SparseLU
{
public:
  enum class Op
  {
    normal,     // A x = b
    transpose,  // A^T x = b
    adjoint     // A^H x = b
  };

  SparseLU() = default;
  SparseLU(const SparseLU &) = delete;
  SparseLU &operator=(const SparseLU &) = delete;
  SparseLU(SparseLU &&) noexcept = default;
  SparseLU &operator=(SparseLU &&) noexcept = default;
  ~SparseLU() = default;

  // Computes a symbolic analysis usable by every matrix sharing this pattern.
  static std::shared_ptr<void> Analyze(const SpMat &A);

  // Numeric factorization; analyzes the pattern first when no symbolic object is given.
  void Factor(const SpMat &A, std::shared_ptr<void> symbolic = nullptr);

  void Solve(const cplx *b, cplx *x, Op op = Op::normal) const;
  Vec Solve(const Vec &b, Op op = Op::normal) const;

  bool Factored() const { return static_cast<bool>(numeric_); }
  int Rows() const { return n_; }

  // Cheap pivot-ratio estimate reported by UMFPACK.
  double PivotRatio() const { return pivot_ratio_; }
  // Bytes held by the numeric factorization.
  double MemoryBytes() const { return memory_bytes_; }

  // Hager-Higham estimate of 1 / (||A||_1 ||A^{-1}||_1).
  double ReciprocalCondition() const;

private:
  std::shared_ptr<void> symbolic_;
  std::shared_ptr<void> numeric_;
  SpMat A_;  // kept for the solve call and the norm in the condition estimate
  int n_ = 0;
  double pivot_ratio_ = 0.0;
  double memory_bytes_ = 0.0;
};

}  // namespace lapwave

#endif  // LAPWAVE_SPARSE_LU_HPP
