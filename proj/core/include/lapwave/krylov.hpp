// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef LAPWAVE_KRYLOV_HPP
#define LAPWAVE_KRYLOV_HPP

#include <functional>
#include <vector>
#include "lapwave/types.hpp"

namespace lapwave
{

using LinearMap = std::function<void(const Vec &in, Vec &out)>;

struct RitzPair
{
  cplx theta;
  Vec vector;       // unit 2-norm
  double residual;  // |h_{m+1,m} y_m|, residual of the operator eigenpair
};

// Arnoldi with full reorthogonalization. Returns all Ritz pairs of the m-step
// factorization (fewer if an invariant subspace is found).
std::vector<RitzPair> Arnoldi(const LinearMap &op, const Vec &v0, int m);

struct GmresResult
{
  Vec x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  // Extreme singular values of the final Hessenberg matrix; their ratio approximates the
  // reciprocal condition of the operator on the Krylov space.
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};

// Unrestarted GMRES, classical Gram-Schmidt with one reorthogonalization pass.
GmresResult Gmres(const LinearMap &op, const Vec &b, const Vec &x0, double tol, int max_iter);

}  // namespace lapwave

#endif  // LAPWAVE_KRYLOV_HPP
