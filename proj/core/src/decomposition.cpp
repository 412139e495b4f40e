// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lapwave/decomposition.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace lapwave
{

std::vector<GFunction> BuildGFunctions(const std::vector<ModeSystem> &modes,
                                       const CellMesh &mesh, const PeriodicBasis &basis,
                                       const CellQuadrature &quad)
{
  std::vector<GFunction> out;
  for (std::size_t e = 0; e < modes.size(); e++)
  {
    const ModeSystem &ms = modes[e];
    for (int j = 0; j < ms.Size(); j++)
    {
      GFunction g;
      g.beta_hat = ms.beta_hat;
      g.lambda = ms.lambdas[j];
      g.exceptional_index = static_cast<int>(e);
      g.mode_index = j;
      g.cell = g.lambda > 0.0 ? 1 : -1;
      g.phi_hat = ms.phi_hat[j];
      g.g_at_quad.assign(quad.Size(), 0.0);
      g.phi_at_quad.assign(quad.Size(), 0.0);
      const double b = g.beta_hat;
      for (int t = 0; t < mesh.NumTriangles(); t++)
      {
        const auto &tri = mesh.triangles[t];
        cplx nodal[3];
        cplx d1 = 0.0;
        for (int a = 0; a < 3; a++)
        {
          const int dof = basis.dof_of_node[tri[a]];
          nodal[a] = dof >= 0 ? g.phi_hat[dof] : cplx(0.0);
          d1 += quad.grad[3 * t + a][0] * nodal[a];
        }
        for (int q = 0; q < 3; q++)
        {
          const int i = 3 * t + q;
          cplx ph = 0.0;
          for (int a = 0; a < 3; a++)
          {
            ph += CellQuadrature::bary[q][a] * nodal[a];
          }
          g.phi_at_quad[i] = ph;
          const double X1 = quad.points[i].x1 + g.cell;
          const RampValue psi = RampPsi(X1, g.cell);
          if (psi.d1 == 0.0 && psi.d2 == 0.0)
          {
            continue;
          }
          g.g_at_quad[i] =
              std::exp(I * b * X1) * (2.0 * psi.d1 * (I * b * ph + d1) + psi.d2 * ph);
        }
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

cplx PairGPhi(const GFunction &gm, const GFunction &phin, const CellQuadrature &quad)
{
  cplx s = 0.0;
  for (int i = 0; i < quad.Size(); i++)
  {
    if (gm.g_at_quad[i] == 0.0)
    {
      continue;
    }
    const double X1 = quad.points[i].x1 + gm.cell;
    s += quad.weights[i] * gm.g_at_quad[i] *
         std::conj(std::exp(I * phin.beta_hat * X1) * phin.phi_at_quad[i]);
  }
  return s;
}

FluxWeights CalibrateWeights(const std::vector<GFunction> &gf, const CellQuadrature &quad)
{
  FluxWeights fw;
  int plus = 0;
  for (const auto &g : gf)
  {
    const cplx kappa = PairGPhi(g, g, quad);
    const int s = kappa.imag() >= 0.0 ? 1 : -1;
    plus += s > 0;
    fw.signs.push_back(s);
    fw.w.push_back(1.0 / (I * static_cast<double>(s) * std::abs(g.lambda)));
  }
  if (!gf.empty())
  {
    const int n = static_cast<int>(gf.size());
    fw.global_sign = plus == n ? 1 : (plus == 0 ? -1 : 0);
  }
  return fw;
}

cplx PairWithMode(const std::vector<cplx> &r_at_quad, const GFunction &gm,
                  const CellQuadrature &quad, int cell)
{
  cplx s = 0.0;
  for (int i = 0; i < quad.Size(); i++)
  {
    if (r_at_quad[i] == 0.0)
    {
      continue;
    }
    const double X1 = quad.points[i].x1 + cell;
    s += quad.weights[i] * r_at_quad[i] *
         std::conj(std::exp(I * gm.beta_hat * X1) * gm.phi_at_quad[i]);
  }
  return s;
}

std::vector<cplx> ProjectionCoefficients(const std::vector<cplx> &r_at_quad,
                                         const std::vector<GFunction> &gf,
                                         const FluxWeights &fw, const CellQuadrature &quad)
{
  std::vector<cplx> c;
  for (std::size_t m = 0; m < gf.size(); m++)
  {
    c.push_back(fw.w[m] * PairWithMode(r_at_quad, gf[m], quad, 0));
  }
  return c;
}

double CheckSigmaAdmissible(const FloquetSpectrum &spec, double sigma)
{
  if (!(sigma > 0.0))
  {
    throw Error(ErrorCode::sigma_admissibility, "sigma must be positive");
  }
  double margin = spec.real.empty() ? 1e300 : sigma;
  for (cplx z : spec.complex)
  {
    const double im = std::abs(z.imag());
    if (im < 1.25 * sigma)
    {
      throw Error(ErrorCode::sigma_admissibility,
                  "Floquet eigenvalue " + std::to_string(z.real()) + " + " +
                      std::to_string(z.imag()) + "i lies in the strip swept by the shift; use " +
                      "sigma < " + std::to_string(0.8 * im));
    }
    margin = std::min(margin, im - sigma);
  }
  return margin;
}

DecompSolution DecompSolve(const ScatteringProblem &prob, const Discretization &d,
                           const DecompOptions &opts, const SpectralAnalysis *spectral)
{
  const auto start = std::chrono::steady_clock::now();
  const TrigGrid grid(opts.N);
  DecompSolution sol;
  std::optional<SpectralAnalysis> own;
  // A caller-provided analysis must have been run with band >= 2 sigma.
  if (!spectral)
  {
    QepOptions qep = opts.qep;
    qep.band = std::max(qep.band, 2.0 * opts.sigma);
    own = AnalyzeSpectrum(d.P, prob.k, qep);
    spectral = &*own;
  }
  sol.report.sigma_margin = CheckSigmaAdmissible(spectral->spectrum, opts.sigma);
  sol.line = BuildShiftedLine(opts.sigma, opts.smoothing);
  std::vector<cplx> alpha, dalpha;
  for (int l = 1; l <= grid.N; l++)
  {
    alpha.push_back(sol.line.Eval(grid.Node(l)));
    dalpha.push_back(sol.line.Deriv(grid.Node(l)));
  }
  if (prob.f.support_box)
  {
    const Box &b = *prob.f.support_box;
    if (b.x1_min < -0.5 - 1e-12 || b.x1_max > 0.5 + 1e-12)
    {
      throw Error(ErrorCode::support, "supp f must lie in the reference cell");
    }
  }

  const CoupledSystem sys(d.mesh, d.basis, d.P, prob.k, prob.q, alpha, dalpha);
  const CellQuadrature &quad = sys.Quadrature();
  sol.modes = BuildGFunctions(spectral->modes, d.mesh, d.basis, quad);
  const FluxWeights fw = CalibrateWeights(sol.modes, quad);
  const int I_m = static_cast<int>(sol.modes.size());

  std::vector<cplx> fq(quad.Size());
  for (int i = 0; i < quad.Size(); i++)
  {
    fq[i] = prob.f(quad.points[i].x1, quad.points[i].x2);
  }
  const std::vector<cplx> proj = ProjectionCoefficients(fq, sol.modes, fw, quad);

  auto load_g = [&](int l, int m)
  {
    return AssembleModulatedLoad(d.mesh, d.basis, quad, sol.modes[m].g_at_quad, alpha[l],
                                 sol.modes[m].cell);
  };
  auto F = [&](int l)
  {
    Vec v = AssembleModulatedLoad(d.mesh, d.basis, quad, fq, alpha[l], 0);
    for (int m = 0; m < I_m; m++)
    {
      if (proj[m] != 0.0)
      {
        v -= proj[m] * load_g(l, m);
      }
    }
    return Vec(dalpha[l] * v);
  };
  auto G = [&](int l, int m) { return Vec(dalpha[l] * load_g(l, m)); };

  // D: C_m = k^2 w_m int q U conj(phi_m) over the coupling vertices.
  const auto &verts = sys.CouplingVertices();
  const int p = static_cast<int>(verts.size());
  std::vector<int> local(d.mesh.NumVertices(), -1);
  for (int i = 0; i < p; i++)
  {
    local[verts[i]] = i;
  }
  Mat D = Mat::Zero(I_m, p);
  if (p > 0)
  {
    for (int t = 0; t < d.mesh.NumTriangles(); t++)
    {
      const auto &tri = d.mesh.triangles[t];
      if (local[tri[0]] < 0 && local[tri[1]] < 0 && local[tri[2]] < 0)
      {
        continue;
      }
      for (int q = 0; q < 3; q++)
      {
        const int i = 3 * t + q;
        const double qv = prob.q(quad.points[i].x1, quad.points[i].x2);
        if (qv == 0.0)
        {
          continue;
        }
        for (int m = 0; m < I_m; m++)
        {
          const GFunction &gm = sol.modes[m];
          const cplx phibar =
              std::conj(std::exp(I * gm.beta_hat * quad.points[i].x1) * gm.phi_at_quad[i]);
          const cplx val = prob.KSquared() * fw.w[m] * quad.weights[i] * qv * phibar;
          for (int a = 0; a < 3; a++)
          {
            if (local[tri[a]] >= 0)
            {
              D(m, local[tri[a]]) += val * CellQuadrature::bary[q][a];
            }
          }
        }
      }
    }
  }

  CoupledResult res = opts.monolithic ? sys.SolveMonolithic(F, I_m, G, D, opts.coupled.cells)
                                      : sys.Solve(F, I_m, G, D, opts.coupled);
  sol.bloch = std::move(res.bloch);
  for (int m = 0; m < I_m; m++)
  {
    const cplx C = m < res.C.size() ? res.C[m] : cplx(0.0);
    sol.coeffs_C.push_back(C);
    sol.amplitudes.push_back(proj[m] - C);
  }
  for (const FieldOnCell &u1 : res.fields)
  {
    FieldOnCell u = u1;
    const int c = u1.cell_index;
    for (int m = 0; m < I_m; m++)
    {
      const GFunction &gm = sol.modes[m];
      for (int v = 0; v < d.mesh.NumVertices(); v++)
      {
        const int dof = d.basis.dof_of_node[v];
        if (dof < 0)
        {
          continue;
        }
        const double X1 = d.mesh.vertices[v].x1 + c;
        const double psi = RampPsi(X1, gm.cell).value;
        if (psi != 0.0)
        {
          u.values[v] += sol.amplitudes[m] * psi * std::exp(I * gm.beta_hat * X1) * gm.phi_hat[dof];
        }
      }
    }
    sol.field.push_back(std::move(u));
  }
  sol.u1 = std::move(res.fields);

  sol.report.m_prime = d.basis.m_prime;
  sol.report.N = opts.N;
  sol.report.h = d.h;
  sol.report.sigma = opts.sigma;
  sol.report.num_modes = I_m;
  sol.report.S_plus = spectral->classification.S_plus;
  sol.report.S_minus = spectral->classification.S_minus;
  for (const auto &g : sol.modes)
  {
    sol.report.flux_pairings.push_back(PairGPhi(g, g, quad));
  }
  sol.report.calibrated_sign = fw.global_sign;
  sol.report.seconds_spectral = spectral->seconds;
  sol.report.coupled = res.stats;
  sol.report.seconds_total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace lapwave
