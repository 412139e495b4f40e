// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lapwave/krylov.hpp"

#include <cmath>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace lapwave
{

namespace
{

// Orthogonalizes w against the first j+1 columns of V, twice, accumulating into h.
void Orthogonalize(const Mat &V, int j, Vec &w, Eigen::Ref<Vec> h)
{
  for (int pass = 0; pass < 2; pass++)
  {
    const Vec c = V.leftCols(j + 1).adjoint() * w;
    w -= V.leftCols(j + 1) * c;
    h.head(j + 1) += c;
  }
}

}  // namespace

std::vector<RitzPair> Arnoldi(const LinearMap &op, const Vec &v0, int m)
{
  const int n = static_cast<int>(v0.size());
  m = std::min(m, n);
  Mat V(n, m + 1);
  Mat H = Mat::Zero(m + 1, m);
  V.col(0) = v0 / v0.norm();
  int steps = m;
  Vec w(n);
  for (int j = 0; j < m; j++)
  {
    op(V.col(j), w);
    const double wnorm0 = w.norm();
    Orthogonalize(V, j, w, H.col(j));
    const double beta = w.norm();
    H(j + 1, j) = beta;
    if (beta <= 1e-14 * std::max(1.0, wnorm0))
    {
      steps = j + 1;
      break;
    }
    V.col(j + 1) = w / beta;
  }
  Eigen::ComplexEigenSolver<Mat> es(H.topLeftCorner(steps, steps));
  std::vector<RitzPair> out;
  out.reserve(steps);
  const double hlast = std::abs(H(steps, steps - 1));
  for (int i = 0; i < steps; i++)
  {
    Vec y = es.eigenvectors().col(i);
    y /= y.norm();
    RitzPair r;
    r.theta = es.eigenvalues()[i];
    r.vector = V.leftCols(steps) * y;
    r.vector /= r.vector.norm();
    r.residual = (steps < m || hlast == 0.0) ? 0.0 : hlast * std::abs(y[steps - 1]);
    out.push_back(std::move(r));
  }
  return out;
}

GmresResult Gmres(const LinearMap &op, const Vec &b, const Vec &x0, double tol, int max_iter)
{
  const int n = static_cast<int>(b.size());
  GmresResult res;
  const double bnorm = b.norm();
  if (bnorm == 0.0)
  {
    res.x = Vec::Zero(n);
    res.converged = true;
    return res;
  }
  Vec r(n), Ax(n);
  op(x0, Ax);
  r = b - Ax;
  double beta = r.norm();
  res.x = x0;
  if (beta <= tol * bnorm)
  {
    res.relative_residual = beta / bnorm;
    res.converged = true;
    return res;
  }
  max_iter = std::min(max_iter, n);
  Mat V(n, max_iter + 1);
  Mat H = Mat::Zero(max_iter + 1, max_iter);
  Mat R = Mat::Zero(max_iter + 1, max_iter);  // rotated copy
  std::vector<cplx> cs(max_iter), sn(max_iter);
  Vec g = Vec::Zero(max_iter + 1);
  g[0] = beta;
  V.col(0) = r / beta;
  int k = 0;
  Vec w(n);
  for (; k < max_iter; k++)
  {
    op(V.col(k), w);
    Orthogonalize(V, k, w, H.col(k));
    const double hnext = w.norm();
    H(k + 1, k) = hnext;
    if (hnext > 0.0)
    {
      V.col(k + 1) = w / hnext;
    }
    R.col(k) = H.col(k);
    for (int i = 0; i < k; i++)
    {
      const cplx t = std::conj(cs[i]) * R(i, k) + std::conj(sn[i]) * R(i + 1, k);
      R(i + 1, k) = -sn[i] * R(i, k) + cs[i] * R(i + 1, k);
      R(i, k) = t;
    }
    const cplx a = R(k, k), bb = R(k + 1, k);
    const double rho = std::sqrt(std::norm(a) + std::norm(bb));
    cs[k] = (rho == 0.0) ? cplx(1.0) : a / rho;
    sn[k] = (rho == 0.0) ? cplx(0.0) : bb / rho;
    R(k, k) = rho;
    R(k + 1, k) = 0.0;
    g[k + 1] = -sn[k] * g[k];
    g[k] = std::conj(cs[k]) * g[k];
    res.relative_residual = std::abs(g[k + 1]) / bnorm;
    if (res.relative_residual <= tol || hnext == 0.0)
    {
      k++;
      res.converged = res.relative_residual <= tol || hnext == 0.0;
      break;
    }
  }
  res.iterations = k;
  const Vec y = R.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
  res.x = x0 + V.leftCols(k) * y;
  Eigen::JacobiSVD<Mat> svd(H.topLeftCorner(k + 1, k));
  res.sigma_max = svd.singularValues()[0];
  res.sigma_min = svd.singularValues()[k - 1];
  return res;
}

}  // namespace lapwave
