// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lapwave/cci.hpp"

#include <algorithm>
#include <chrono>

namespace lapwave
{

Vec CciNodes::Load(const Discretization &d, const CellQuadrature &quad, int l) const
{
  return dalpha[l] * AssembleModulatedLoad(d.mesh, d.basis, quad, f_at_quad, alpha[l], 0);
}

CciNodes BuildCciNodes(const ScatteringProblem &prob, const Discretization &d,
                       const ContourParam &contour, const TrigGrid &grid)
{
  if (prob.f.support_box)
  {
    const Box &b = *prob.f.support_box;
    if (b.x1_min < -0.5 - 1e-12 || b.x1_max > 0.5 + 1e-12)
    {
      throw Error(ErrorCode::support, "supp f must lie in the reference cell");
    }
  }
  CciNodes nodes;
  for (int l = 1; l <= grid.N; l++)
  {
    nodes.alpha.push_back(contour.Eval(grid.Node(l)));
    nodes.dalpha.push_back(contour.Deriv(grid.Node(l)));
  }
  const CellQuadrature quad = BuildQuadrature(d.mesh);
  nodes.f_at_quad.resize(quad.Size());
  for (int i = 0; i < quad.Size(); i++)
  {
    nodes.f_at_quad[i] = prob.f(quad.points[i].x1, quad.points[i].x2);
  }
  return nodes;
}

ContourParam CciContour(const SpectralAnalysis &sa, double delta, int smoothing)
{
  const auto &cls = sa.classification;
  ContourParam contour = BuildCciContour(cls.S_plus, cls.S_minus, delta, smoothing);
  for (cplx z : sa.spectrum.complex)
  {
    for (const auto &ev : sa.spectrum.real)
    {
      if (std::abs(z - ev.beta_hat) <= delta * 1.05)
      {
        throw Error(ErrorCode::contour_configuration,
                    "a complex Floquet eigenvalue lies inside the indentation disk around " +
                        std::to_string(ev.beta_hat) + "; reduce delta");
      }
    }
  }
  return contour;
}

CciSolution CciSolve(const ScatteringProblem &prob, const Discretization &d,
                     const CciOptions &opts, const SpectralAnalysis *spectral)
{
  const auto start = std::chrono::steady_clock::now();
  const TrigGrid grid(opts.N);
  CciSolution sol;
  std::optional<SpectralAnalysis> own;
  if (!spectral)
  {
    QepOptions qep = opts.qep;
    qep.band = std::max(qep.band, 0.35);
    own = AnalyzeSpectrum(d.P, prob.k, qep);
    spectral = &*own;
  }
  std::vector<double> all;
  for (const auto &ev : spectral->spectrum.real)
  {
    all.push_back(ev.beta_hat);
  }
  const double delta = opts.delta.value_or(DefaultDelta(all));
  sol.contour = CciContour(*spectral, delta, opts.smoothing);
  sol.report.min_node_distance = all.empty() ? 0.0 : MinNodeDistance(sol.contour, opts.N, all);
  if (!all.empty() && sol.report.min_node_distance < 0.5 * delta)
  {
    throw Error(ErrorCode::contour_configuration,
                "a contour node comes closer than delta / 2 to an exceptional value");
  }

  const CciNodes nodes = BuildCciNodes(prob, d, sol.contour, grid);
  const CoupledSystem sys(d.mesh, d.basis, d.P, prob.k, prob.q, nodes.alpha, nodes.dalpha);
  const CellQuadrature &quad = sys.Quadrature();
  auto F = [&](int l) { return nodes.Load(d, quad, l); };
  auto G = [](int, int) -> Vec { return Vec(); };
  CoupledResult res;
  if (opts.monolithic)
  {
    res = sys.SolveMonolithic(F, 0, G, Mat(), opts.coupled.cells);
  }
  else
  {
    res = sys.Solve(F, 0, G, Mat(), opts.coupled);
  }
  sol.fields = std::move(res.fields);
  sol.bloch = std::move(res.bloch);
  sol.report.m_prime = d.basis.m_prime;
  sol.report.N = opts.N;
  sol.report.h = d.h;
  sol.report.delta = delta;
  sol.report.S_plus = spectral->classification.S_plus;
  sol.report.S_minus = spectral->classification.S_minus;
  sol.report.seconds_spectral = spectral->seconds;
  sol.report.coupled = res.stats;
  sol.report.seconds_total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace lapwave
