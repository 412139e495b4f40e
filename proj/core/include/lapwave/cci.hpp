// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef LAPWAVE_CCI_HPP
#define LAPWAVE_CCI_HPP

#include <optional>
#include <vector>
#include "lapwave/contour.hpp"
#include "lapwave/coupled.hpp"
#include "lapwave/fem.hpp"
#include "lapwave/problem.hpp"
#include "lapwave/spectral.hpp"

namespace lapwave
{

// Complex-contour integral method: the inverse Bloch transform is taken along a contour
// that dips below rightgoing and rises above leftgoing exceptional values.
struct CciOptions
{
  int N = 256;
  std::optional<double> delta;  // default: DefaultDelta of the exceptional values
  int smoothing = 8;
  bool monolithic = false;  // direct sparse solve of the whole system instead of Schur
  CoupledOptions coupled;
  QepOptions qep;
};

struct CciReport
{
  int m_prime = 0;
  int N = 0;
  double h = 0.0;
  double delta = 0.0;
  double min_node_distance = 0.0;
  std::vector<double> S_plus, S_minus;
  double seconds_spectral = 0.0;
  double seconds_total = 0.0;
  CoupledStats coupled;
};

struct CciSolution
{
  std::vector<FieldOnCell> fields;
  std::optional<BlochField> bloch;
  ContourParam contour;
  CciReport report;
};

// Node data of the block system: alpha_l = s(t_l), alpha'_l = s'(t_l) and the loads
// F_l = s'(t_l) * (-int exp(-i alpha_l x1) f zeta_j).
struct CciNodes
{
  std::vector<cplx> alpha, dalpha;
  std::vector<cplx> f_at_quad;
  Vec Load(const Discretization &d, const CellQuadrature &quad, int l) const;
};

CciNodes BuildCciNodes(const ScatteringProblem &prob, const Discretization &d,
                       const ContourParam &contour, const TrigGrid &grid);

// Contour from a completed spectral analysis; checks that complex Floquet eigenvalues
// stay outside the indentation disks and that nodes keep delta / 2 from S(k).
ContourParam CciContour(const SpectralAnalysis &sa, double delta, int smoothing);

CciSolution CciSolve(const ScatteringProblem &prob, const Discretization &d,
                     const CciOptions &opts, const SpectralAnalysis *spectral = nullptr);

}  // namespace lapwave

#endif  // LAPWAVE_CCI_HPP
