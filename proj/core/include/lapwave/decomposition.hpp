// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef LAPWAVE_DECOMPOSITION_HPP
#define LAPWAVE_DECOMPOSITION_HPP

#include <optional>
#include <string>
#include <vector>
#include "lapwave/contour.hpp"
#include "lapwave/coupled.hpp"
#include "lapwave/fem.hpp"
#include "lapwave/problem.hpp"
#include "lapwave/spectral.hpp"

namespace lapwave
{

// One propagating mode phi(x) = exp(i beta_hat x1) phi_hat(x) together with its
// cutoff-weighted source g = 2 psi' d1 phi + psi'' phi, living on the cell where the
// ramp psi^+ (lambda > 0, cell +1) or psi^- (lambda < 0, cell -1) varies.
struct GFunction
{
  double beta_hat = 0.0;
  double lambda = 0.0;
  int exceptional_index = 0;
  int mode_index = 0;
  int cell = 1;
  Vec phi_hat;                   // periodic DOF values
  std::vector<cplx> g_at_quad;   // g(x + cell e1) at the quadrature points of Omega_0
  std::vector<cplx> phi_at_quad; // phi_hat at the quadrature points
};

std::vector<GFunction> BuildGFunctions(const std::vector<ModeSystem> &modes,
                                       const CellMesh &mesh, const PeriodicBasis &basis,
                                       const CellQuadrature &quad);

// int over Omega_c of g_m conj(phi_n), with c the cell carrying g_m.
cplx PairGPhi(const GFunction &gm, const GFunction &phin, const CellQuadrature &quad);

// Flux weights w_m = 1 / (i s_m |lambda_m|) with s_m = sign Im int g_m conj(phi_m), so
// that <M(g), phi_m> = 0.
struct FluxWeights
{
  std::vector<cplx> w;
  std::vector<int> signs;
  int global_sign = 0;  // +1 or -1 when all modes agree, 0 otherwise
};

FluxWeights CalibrateWeights(const std::vector<GFunction> &gf, const CellQuadrature &quad);

// int_{Omega_0} r conj(phi_m) for r given at the quadrature points of Omega_0.
cplx PairWithMode(const std::vector<cplx> &r_at_quad, const GFunction &gm,
                  const CellQuadrature &quad, int cell = 0);

// M(r) = r - sum_m w_m (int r conj(phi_m)) g_m for r supported in Omega_0; returns the
// coefficients w_m int r conj(phi_m) subtracted in front of each g_m.
std::vector<cplx> ProjectionCoefficients(const std::vector<cplx> &r_at_quad,
                                         const std::vector<GFunction> &gf,
                                         const FluxWeights &fw, const CellQuadrature &quad);

struct DecompOptions
{
  int N = 256;
  double sigma = 0.2;
  int smoothing = 8;
  bool monolithic = false;
  CoupledOptions coupled;
  QepOptions qep;
};

struct DecompReport
{
  int m_prime = 0;
  int N = 0;
  double h = 0.0;
  double sigma = 0.0;
  double sigma_margin = 0.0;  // distance of the shifted line to the nearest Floquet eigenvalue
  int num_modes = 0;
  std::vector<double> S_plus, S_minus;
  std::vector<cplx> flux_pairings;  // int g_m conj(phi_m)
  int calibrated_sign = 0;
  double seconds_spectral = 0.0;
  double seconds_total = 0.0;
  CoupledStats coupled;
};

struct DecompSolution
{
  std::vector<FieldOnCell> u1;     // decaying part on the requested cells
  std::vector<FieldOnCell> field;  // u1 plus the cutoff-weighted propagating modes
  std::vector<cplx> coeffs_C;      // coupling unknowns k^2 w_m int q u1 conj(phi_m)
  std::vector<cplx> amplitudes;    // w_m int (f - k^2 q u1) conj(phi_m)
  std::vector<GFunction> modes;
  std::optional<BlochField> bloch;
  ContourParam line;
  DecompReport report;
};

// Throws a sigma-admissibility error when a non-real Floquet eigenvalue lies within
// 0 < |Im| < 1.25 sigma; returns the distance of the line Im = sigma to the spectrum.
double CheckSigmaAdmissible(const FloquetSpectrum &spec, double sigma);

DecompSolution DecompSolve(const ScatteringProblem &prob, const Discretization &d,
                           const DecompOptions &opts, const SpectralAnalysis *spectral = nullptr);

}  // namespace lapwave

#endif  // LAPWAVE_DECOMPOSITION_HPP
