// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lapwave/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <Eigen/Eigenvalues>
#include "lapwave/krylov.hpp"
#include "lapwave/sparse_lu.hpp"

namespace lapwave
{

namespace
{

Vec DeterministicStart(int n, unsigned seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; i++)
  {
    v[i] = cplx(u(rng), u(rng));
  }
  return v;
}

SpMat HermitianPart(const PencilMatrices &P, double alpha)
{
  return P.A1 + alpha * P.A2 + (alpha * alpha) * P.A3;
}

std::vector<double> LowestEigenvaluesDense(const SpMat &K, const SpMat &M, int m)
{
  const Mat Kd = Mat(K);
  const Mat Md = Mat(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Kd, Md, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
  {
    throw Error(ErrorCode::eigensolver, "dense generalized Hermitian eigensolver failed");
  }
  std::vector<double> out;
  for (int i = 0; i < std::min<int>(m, es.eigenvalues().size()); i++)
  {
    out.push_back(es.eigenvalues()[i]);
  }
  return out;
}

std::vector<double> LowestEigenvaluesArnoldi(const SpMat &K, const SpMat &M, int m)
{
  const double sigma = -1.0;
  SparseLU lu;
  lu.Factor(SpMat(K - sigma * M));
  const int n = static_cast<int>(K.rows());
  LinearMap op = [&](const Vec &in, Vec &out)
  {
    const Vec t = M * in;
    out = lu.Solve(t);
  };
  for (int dim = std::max(2 * m + 10, 30); dim <= 8 * (2 * m + 10); dim *= 2)
  {
    auto ritz = Arnoldi(op, DeterministicStart(n, 17), dim);
    std::sort(ritz.begin(), ritz.end(), [](const RitzPair &a, const RitzPair &b)
              { return std::abs(a.theta) > std::abs(b.theta); });
    bool ok = static_cast<int>(ritz.size()) >= m;
    std::vector<double> out;
    for (int i = 0; ok && i < m; i++)
    {
      ok = ritz[i].residual <= 1e-9 * std::abs(ritz[i].theta);
      out.push_back(sigma + 1.0 / ritz[i].theta.real());
    }
    if (ok)
    {
      std::sort(out.begin(), out.end());
      return out;
    }
  }
  throw Error(ErrorCode::eigensolver, "dispersion eigensolver did not converge");
}

struct RawEigen
{
  cplx beta;
  Vec x1;
};

std::vector<RawEigen> QepDense(const PencilMatrices &P, double k)
{
  const int n = P.Size();
  const Mat K = Mat(P.A1 + (k * k) * P.A4);
  const Mat A2 = Mat(P.A2);
  const Mat A3 = Mat(P.A3);
  Eigen::PartialPivLU<Mat> m3(A3);
  Mat C = Mat::Zero(2 * n, 2 * n);
  C.topRightCorner(n, n).setIdentity();
  C.bottomLeftCorner(n, n) = -m3.solve(K);
  C.bottomRightCorner(n, n) = -m3.solve(A2);
  Eigen::ComplexEigenSolver<Mat> es(C);
  if (es.info() != Eigen::Success)
  {
    throw Error(ErrorCode::eigensolver, "dense companion eigensolver failed");
  }
  std::vector<RawEigen> out;
  for (int i = 0; i < 2 * n; i++)
  {
    Vec x1 = es.eigenvectors().col(i).head(n);
    out.push_back({es.eigenvalues()[i], x1 / x1.norm()});
  }
  return out;
}

std::vector<RawEigen> QepArnoldi(const PencilMatrices &P, double k, const QepOptions &opts,
                                 double band)
{
  const int n = P.Size();
  const int S = opts.num_shifts;
  const double half = pi / S;
  const double radius = 1.15 * std::sqrt(half * half + band * band);
  std::shared_ptr<void> symbolic = SparseLU::Analyze(P.Evaluate(0.3, k));
  std::vector<RawEigen> out;
  for (int s = 0; s < S; s++)
  {
    const double sigma = -pi + (2 * s + 1) * half;
    SparseLU lu;
    lu.Factor(P.Evaluate(sigma, k), symbolic);
    LinearMap op = [&](const Vec &in, Vec &out_vec)
    {
      const auto x1 = in.head(n), x2 = in.tail(n);
      const Vec a = -(P.A2 * x1) - P.A3 * x2;
      const Vec b = x1;
      const Vec rhs = a - sigma * (P.A3 * b);
      out_vec.resize(2 * n);
      out_vec.head(n) = lu.Solve(rhs);
      out_vec.tail(n) = b + sigma * out_vec.head(n);
    };
    bool done = false;
    for (int dim = opts.krylov_dim; dim <= 8 * opts.krylov_dim && !done; dim *= 2)
    {
      const auto ritz = Arnoldi(op, DeterministicStart(2 * n, 1000 + s), dim);
      bool inside_ok = true;
      int outside_converged = 0;
      std::vector<RawEigen> found;
      for (const auto &r : ritz)
      {
        if (std::abs(r.theta) == 0.0)
        {
          continue;
        }
        const cplx beta = sigma + 1.0 / r.theta;
        const bool converged = r.residual <= 1e-10 * std::abs(r.theta);
        if (std::abs(beta - sigma) < radius)
        {
          if (!converged)
          {
            inside_ok = false;
            break;
          }
          if (std::abs(beta.real() - sigma) <= half + 1e-12)
          {
            Vec x1 = r.vector.head(n);
            found.push_back({beta, x1 / x1.norm()});
          }
        }
        else if (converged)
        {
          outside_converged++;
        }
      }
      if (inside_ok && (outside_converged > 0 || static_cast<int>(ritz.size()) < dim))
      {
        out.insert(out.end(), found.begin(), found.end());
        done = true;
      }
    }
    if (!done)
    {
      throw Error(ErrorCode::eigensolver,
                  "shift-invert Arnoldi did not converge near alpha = " + std::to_string(sigma));
    }
  }
  return out;
}

// Inverse iteration on A(beta, k) to clean up a block of null vectors.
std::vector<Vec> RefineNullVectors(const PencilMatrices &P, double beta, double k,
                                   std::vector<Vec> vecs)
{
  SpMat A = P.Evaluate(beta, k);
  auto residual = [&](const Vec &v) { return (A * v).norm() / v.norm(); };
  double worst = 0.0;
  for (const auto &v : vecs)
  {
    worst = std::max(worst, residual(v));
  }
  if (worst <= 1e-10)
  {
    return vecs;
  }
  SparseLU lu;
  lu.Factor(A);
  const int m = static_cast<int>(vecs.size());
  Mat X(P.Size(), m);
  for (int i = 0; i < m; i++)
  {
    X.col(i) = vecs[i];
  }
  for (int it = 0; it < 2; it++)
  {
    for (int i = 0; i < m; i++)
    {
      X.col(i) = lu.Solve(Vec(X.col(i)));
    }
    Eigen::HouseholderQR<Mat> qr(X);
    X = qr.householderQ() * Mat::Identity(P.Size(), m);
  }
  for (int i = 0; i < m; i++)
  {
    vecs[i] = X.col(i);
  }
  return vecs;
}

}  // namespace

double WrapToPi(double beta)
{
  double y = std::remainder(beta, 2.0 * pi);
  if (y <= -pi)
  {
    y += 2.0 * pi;
  }
  return y;
}

DispersionDiagram DispersionBranches(const PencilMatrices &P, const std::vector<double> &alphas,
                                     int m)
{
  if (m < 1)
  {
    throw Error(ErrorCode::invalid_argument, "need at least one branch");
  }
  DispersionDiagram d;
  d.alphas = alphas;
  const SpMat M = -P.A4;
  for (double a : alphas)
  {
    const SpMat K = HermitianPart(P, a);
    d.branches.push_back(P.Size() <= 1200 ? LowestEigenvaluesDense(K, M, m)
                                          : LowestEigenvaluesArnoldi(K, M, m));
  }
  return d;
}

FloquetSpectrum FloquetEigenvalues(const PencilMatrices &P, double k, const QepOptions &opts)
{
  if (!(k > 0.0))
  {
    throw Error(ErrorCode::invalid_argument, "wavenumber must be positive");
  }
  const double band = std::max(opts.band, 0.05);
  std::vector<RawEigen> raw;
  const bool dense_ok = P.Size() <= opts.dense_max;
  if (opts.method == QepOptions::Method::dense)
  {
    if (!dense_ok)
    {
      throw Error(ErrorCode::eigensolver, "dense QEP solver limited to M' <= dense_max");
    }
    raw = QepDense(P, k);
  }
  else
  {
    try
    {
      raw = QepArnoldi(P, k, opts, band);
    }
    catch (const Error &e)
    {
      if (opts.method == QepOptions::Method::arnoldi || !dense_ok)
      {
        throw;
      }
      raw = QepDense(P, k);
    }
  }
  FloquetSpectrum spec;
  std::vector<RawEigen> reals;
  for (auto &r : raw)
  {
    const double re = r.beta.real();
    if (!(re > -pi && re <= pi))
    {
      continue;
    }
    if (std::abs(r.beta.imag()) < opts.imag_tol * (1.0 + std::abs(re)))
    {
      reals.push_back(std::move(r));
    }
    else if (std::abs(r.beta.imag()) <= opts.band)
    {
      spec.complex.push_back(r.beta);
    }
  }
  std::sort(reals.begin(), reals.end(),
            [](const RawEigen &a, const RawEigen &b) { return a.beta.real() < b.beta.real(); });
  for (std::size_t i = 0; i < reals.size();)
  {
    std::size_t j = i + 1;
    while (j < reals.size() && reals[j].beta.real() - reals[j - 1].beta.real() < opts.cluster_tol)
    {
      j++;
    }
    ExceptionalValue ev;
    double sum = 0.0;
    for (std::size_t t = i; t < j; t++)
    {
      sum += reals[t].beta.real();
      ev.raw_eigenvectors.push_back(reals[t].x1);
    }
    ev.multiplicity = static_cast<int>(j - i);
    ev.beta_hat = sum / ev.multiplicity;
    // Orthonormalize the cluster so a defective numerical basis does not leak through.
    if (ev.multiplicity > 1)
    {
      Mat X(P.Size(), ev.multiplicity);
      for (int c = 0; c < ev.multiplicity; c++)
      {
        X.col(c) = ev.raw_eigenvectors[c];
      }
      Eigen::HouseholderQR<Mat> qr(X);
      X = qr.householderQ() * Mat::Identity(P.Size(), ev.multiplicity);
      for (int c = 0; c < ev.multiplicity; c++)
      {
        ev.raw_eigenvectors[c] = X.col(c);
      }
    }
    ev.raw_eigenvectors = RefineNullVectors(P, ev.beta_hat, k, std::move(ev.raw_eigenvectors));
    spec.real.push_back(std::move(ev));
    i = j;
  }
  std::sort(spec.complex.begin(), spec.complex.end(), [](cplx a, cplx b)
            { return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag()); });
  return spec;
}

std::vector<ExceptionalValue> FindExceptionalValues(const PencilMatrices &P, double k,
                                                    double imag_tol)
{
  QepOptions opts;
  opts.imag_tol = imag_tol;
  return FloquetEigenvalues(P, k, opts).real;
}

ModeSystem BuildModeSystem(const ExceptionalValue &ev, const PencilMatrices &P, double k)
{
  const int m = ev.multiplicity;
  if (m < 1 || static_cast<int>(ev.raw_eigenvectors.size()) != m)
  {
    throw Error(ErrorCode::invalid_argument, "exceptional value without null vectors");
  }
  Mat Phi(P.Size(), m);
  for (int i = 0; i < m; i++)
  {
    Phi.col(i) = ev.raw_eigenvectors[i];
  }
  const SpMat flux = 0.5 * P.A2 + ev.beta_hat * P.A3;
  const Mat a = Phi.adjoint() * (flux * Phi);
  const Mat b = k * (Phi.adjoint() * (SpMat(-P.A4) * Phi));
  const Mat ah = 0.5 * (a + a.adjoint());
  const Mat bh = 0.5 * (b + b.adjoint());
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(ah, bh);
  if (es.info() != Eigen::Success)
  {
    throw Error(ErrorCode::eigensolver, "flux eigenproblem failed");
  }
  ModeSystem ms;
  ms.beta_hat = ev.beta_hat;
  for (int i = 0; i < m; i++)
  {
    const double lambda = es.eigenvalues()[i];
    if (std::abs(lambda) < lambda_tol)
    {
      throw Error(ErrorCode::standing_wave,
                  "group velocity vanishes at beta = " + std::to_string(ev.beta_hat));
    }
    // Eigen normalizes c^H b c = 1, i.e. k int n |phi|^2 = 1.
    Vec phi = Phi * es.eigenvectors().col(i) / std::sqrt(2.0);
    // Fix the global phase: largest entry real positive.
    int imax = 0;
    phi.cwiseAbs().maxCoeff(&imax);
    phi *= std::abs(phi[imax]) / phi[imax];
    ms.lambdas.push_back(lambda);
    ms.phi_hat.push_back(std::move(phi));
  }
  return ms;
}

Classification ClassifyModes(const std::vector<ModeSystem> &modes, const PencilMatrices &P,
                             double k, double fd_step)
{
  Classification c;
  const SpMat M = -P.A4;
  auto branch_value = [&](double alpha, const Vec &start)
  {
    const SpMat K = HermitianPart(P, alpha);
    SparseLU lu;
    lu.Factor(SpMat(K - (k * k) * M));
    Vec x = start;
    for (int it = 0; it < 4; it++)
    {
      x = lu.Solve(Vec(M * x));
      x /= x.norm();
    }
    return std::real(x.dot(K * x)) / std::real(x.dot(M * x));
  };
  for (const auto &ms : modes)
  {
    bool plus = false, minus = false;
    std::vector<double> slopes;
    for (int l = 0; l < ms.Size(); l++)
    {
      const double up = branch_value(ms.beta_hat + fd_step, ms.phi_hat[l]);
      const double dn = branch_value(ms.beta_hat - fd_step, ms.phi_hat[l]);
      const double slope = (up - dn) / (2.0 * fd_step);
      slopes.push_back(slope);
      if ((slope > 0.0) != (ms.lambdas[l] > 0.0))
      {
        throw Error(ErrorCode::classification,
                    "sign of lambda disagrees with the dispersion slope at beta = " +
                        std::to_string(ms.beta_hat));
      }
      (ms.lambdas[l] > 0.0 ? plus : minus) = true;
    }
    if (plus)
    {
      c.S_plus.push_back(ms.beta_hat);
    }
    if (minus)
    {
      c.S_minus.push_back(ms.beta_hat);
    }
    c.fd_slopes.push_back(std::move(slopes));
  }
  return c;
}

SpectralAnalysis AnalyzeSpectrum(const PencilMatrices &P, double k, const QepOptions &opts)
{
  const auto start = std::chrono::steady_clock::now();
  SpectralAnalysis sa;
  sa.spectrum = FloquetEigenvalues(P, k, opts);
  for (const auto &ev : sa.spectrum.real)
  {
    sa.modes.push_back(BuildModeSystem(ev, P, k));
  }
  sa.classification = ClassifyModes(sa.modes, P, k);
  sa.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sa;
}

double LogLogSlope(const std::vector<double> &x, const std::vector<double> &y)
{
  if (x.size() != y.size() || x.size() < 2)
  {
    throw Error(ErrorCode::invalid_argument, "slope needs at least two matching points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); i++)
  {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

EigenErrorTable EstimateEigenError(const std::vector<double> &h,
                                   const std::vector<double> &values)
{
  if (h.size() != values.size() || h.size() < 3)
  {
    throw Error(ErrorCode::invalid_argument, "need at least three mesh sizes");
  }
  EigenErrorTable t;
  t.h = h;
  t.values = values;
  const std::size_t n = h.size();
  for (std::size_t i = 0; i < n; i++)
  {
    t.errors_vs_finest.push_back(std::abs(values[i] - values[n - 1]));
  }
  std::vector<double> hx(h.begin(), h.end() - 1), ey(t.errors_vs_finest.begin(),
                                                     t.errors_vs_finest.end() - 1);
  bool positive = std::all_of(ey.begin(), ey.end(), [](double e) { return e > 0.0; });
  if (positive)
  {
    t.slope = LogLogSlope(hx, ey);
  }
  for (std::size_t i = 2; i < n; i++)
  {
    const double d1 = values[i - 1] - values[i - 2], d2 = values[i] - values[i - 1];
    if (d1 * d2 <= 0.0 || std::abs(d2) >= std::abs(d1))
    {
      t.monotone = false;
    }
  }
  if (!t.monotone)
  {
    t.warning = "non-monotone sequence, no extrapolation";
    return t;
  }
  const double d1 = values[n - 2] - values[n - 3], d2 = values[n - 1] - values[n - 2];
  const double r1 = h[n - 3] / h[n - 2], r2 = h[n - 2] / h[n - 1];
  const double p = std::log(std::abs(d1 / d2)) / std::log(0.5 * (r1 + r2));
  t.observed_order = p;
  t.extrapolated = values[n - 1] + d2 / (std::pow(r2, p) - 1.0);
  return t;
}

}  // namespace lapwave
