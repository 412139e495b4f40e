// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef LAPWAVE_ORACLE_HPP
#define LAPWAVE_ORACLE_HPP

#include <optional>
#include <vector>
#include "lapwave/fem.hpp"
#include "lapwave/mesh.hpp"
#include "lapwave/problem.hpp"

namespace lapwave
{

// Damped problem  Delta u + (k^2 + i eps)(n + q) u = f  on the cells -R..R of the strip
// with u = 0 on the outer edges x1 = +-(R + 1/2). Every outer cell is condensed onto its
// two edge traces and the chains are folded into Dirichlet-to-Neumann blocks acting on
// the edges of the central cell.
struct TruncatedRun
{
  double epsilon = 0.0;
  int R = 0;
  double h = 0.0;
  std::vector<FieldOnCell> fields;  // cells -keep..keep, in order
  std::vector<double> cell_norms;   // L2 norm per kept cell
  double decay_indicator = 0.0;     // relative size of the trace propagated over R cells

  const FieldOnCell &Cell(int c) const;
};

struct OracleOptions
{
  int R = 0;                     // 0: chosen from epsilon
  int keep_cells = 3;            // fields reported on -keep..keep
  double decay_threshold = 1e-6;
  int max_R = 4000;
};

// R from the damping: ceil(20 / eps), at least 5 and at most max_R.
int DefaultTruncation(double epsilon, int max_R = 4000);

TruncatedRun DampedTruncatedSolve(const ScatteringProblem &prob, const CellMesh &mesh,
                                  double epsilon, const OracleOptions &opts = {});

// Same problem assembled on the whole truncated strip and solved directly; small R only.
TruncatedRun DampedTruncatedSolveMonolithic(const ScatteringProblem &prob,
                                            const CellMesh &mesh, double epsilon, int R,
                                            int keep_cells = 1);

struct LapExtrapolation
{
  FieldOnCell field;
  double error_indicator = 0.0;         // size of the last correction, relative
  std::vector<double> successive_diffs;  // ||u(eps_i) - u(eps_{i+1})|| / ||u(eps_last)||
};

// Polynomial (Neville) extrapolation to eps = 0 of the fields on one cell; runs sorted by
// decreasing eps. The indicator compares the full extrapolation with the one that drops
// the largest eps. Throws no-convergence when successive differences do not shrink.
LapExtrapolation LapExtrapolate(const std::vector<TruncatedRun> &runs, const SpMat &vertex_mass,
                                int cell = 0);

struct ConstantMode
{
  int m = 0;                 // transverse index
  double beta = 0.0;         // unwrapped
  double beta_hat = 0.0;     // wrapped into (-pi, pi]
  double lambda = 0.0;       // beta / (k n0)
  double amplitude = 0.0;    // phi = amplitude * cos or sin(m pi x2) * exp(i beta x1)
};

struct ConstantModes
{
  std::vector<ConstantMode> modes;  // sorted by beta_hat
  bool standing_wave_boundary = false;  // k^2 n0 equals m^2 pi^2 for some m
  std::vector<double> ExceptionalValues() const;
};

// Closed-form propagating modes of the strip with constant n = n0.
ConstantModes AnalyticConstantModes(double n0, double k, BoundaryCondition bc);

}  // namespace lapwave

#endif  // LAPWAVE_ORACLE_HPP
