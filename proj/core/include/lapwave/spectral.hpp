// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef LAPWAVE_SPECTRAL_HPP
#define LAPWAVE_SPECTRAL_HPP

#include <optional>
#include <string>
#include <vector>
#include "lapwave/fem.hpp"
#include "lapwave/types.hpp"

namespace lapwave
{

struct DispersionDiagram
{
  std::vector<double> alphas;
  std::vector<std::vector<double>> branches;  // branches[i] = lowest m values at alphas[i]
};

// Lowest m eigenvalues mu of (A1 + alpha A2 + alpha^2 A3) phi = -mu A4 phi per alpha.
DispersionDiagram DispersionBranches(const PencilMatrices &P, const std::vector<double> &alphas,
                                     int m);

struct ExceptionalValue
{
  double beta_hat = 0.0;
  int multiplicity = 1;
  std::vector<Vec> raw_eigenvectors;
};

struct QepOptions
{
  enum class Method
  {
    automatic,
    arnoldi,
    dense
  };
  Method method = Method::automatic;
  double imag_tol = 1e-6;     // accept |Im beta| < imag_tol (1 + |beta|)
  double cluster_tol = 1e-6;  // group eigenvalues closer than this into one multiplicity
  double band = 0.0;          // also report complex eigenvalues with |Im| <= band
  int num_shifts = 12;
  int krylov_dim = 40;
  int dense_max = 2000;  // largest M' for the dense fallback
};

struct FloquetSpectrum
{
  std::vector<ExceptionalValue> real;  // sorted by beta_hat
  std::vector<cplx> complex;           // non-real eigenvalues with |Im| <= band
};

// Floquet eigenvalues of the quadratic pencil near the real interval (-pi, pi] through
// the linearization B1 W = beta B2 W.
FloquetSpectrum FloquetEigenvalues(const PencilMatrices &P, double k,
                                   const QepOptions &opts = {});

std::vector<ExceptionalValue> FindExceptionalValues(const PencilMatrices &P, double k,
                                                    double imag_tol = 1e-6);

// Propagating modes of one exceptional value, diagonalized by the flux form and
// normalized so that 2k int n phi conj(phi') = delta.
struct ModeSystem
{
  double beta_hat = 0.0;
  std::vector<double> lambdas;
  std::vector<Vec> phi_hat;  // periodic DOF vectors

  int Size() const { return static_cast<int>(lambdas.size()); }
};

inline constexpr double lambda_tol = 1e-6;

ModeSystem BuildModeSystem(const ExceptionalValue &ev, const PencilMatrices &P, double k);

struct Classification
{
  std::vector<double> S_plus;
  std::vector<double> S_minus;
  // Centered finite-difference slopes of the dispersion branch per mode, same layout as
  // the mode systems.
  std::vector<std::vector<double>> fd_slopes;
};

// Sign of lambda decides the direction; cross-checked against a finite difference of the
// dispersion branch through (beta_hat, k^2).
Classification ClassifyModes(const std::vector<ModeSystem> &modes, const PencilMatrices &P,
                             double k, double fd_step = 1e-4);

struct EigenErrorTable
{
  std::vector<double> h;
  std::vector<double> values;
  std::vector<double> errors_vs_finest;  // |value - value(finest)|, last entry 0
  double slope = 0.0;                    // least squares on log-log, finest row excluded
  std::optional<double> observed_order;  // from the last three differences
  std::optional<double> extrapolated;    // Richardson with the observed order
  bool monotone = true;
  std::string warning;
};

// h must be sorted decreasing (coarsest first) and contain at least three entries.
EigenErrorTable EstimateEigenError(const std::vector<double> &h,
                                   const std::vector<double> &values);

// Least-squares slope of log(y) against log(x).
double LogLogSlope(const std::vector<double> &x, const std::vector<double> &y);

// Exceptional values, their mode systems and the direction classification.
struct SpectralAnalysis
{
  FloquetSpectrum spectrum;
  std::vector<ModeSystem> modes;  // one per exceptional value, same order
  Classification classification;
  double seconds = 0.0;
};

SpectralAnalysis AnalyzeSpectrum(const PencilMatrices &P, double k, const QepOptions &opts = {});

// Wraps a real number into (-pi, pi].
double WrapToPi(double beta);

}  // namespace lapwave

#endif  // LAPWAVE_SPECTRAL_HPP
