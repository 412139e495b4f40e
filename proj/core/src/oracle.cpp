// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lapwave/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <Eigen/LU>
#include "lapwave/spectral.hpp"
#include "lapwave/sparse_lu.hpp"

namespace lapwave
{

namespace
{

// Vertex-level matrix of -Delta - kappa2 c over one cell, no boundary identification.
SpMat AssembleDampedCell(const CellMesh &mesh, const CellQuadrature &quad,
                         const std::vector<double> &c_at_quad, cplx kappa2)
{
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(9 * mesh.NumTriangles());
  for (int t = 0; t < mesh.NumTriangles(); t++)
  {
    const auto &tri = mesh.triangles[t];
    const double area = mesh.TriangleArea(t);
    for (int a = 0; a < 3; a++)
    {
      for (int b = 0; b < 3; b++)
      {
        const auto &ga = quad.grad[3 * t + a], &gb = quad.grad[3 * t + b];
        double mass = 0.0;
        for (int q = 0; q < 3; q++)
        {
          const int i = 3 * t + q;
          mass += quad.weights[i] * c_at_quad[i] * CellQuadrature::bary[q][a] *
                  CellQuadrature::bary[q][b];
        }
        trip.emplace_back(tri[a], tri[b], area * (ga[0] * gb[0] + ga[1] * gb[1]) - kappa2 * mass);
      }
    }
  }
  SpMat A(mesh.NumVertices(), mesh.NumVertices());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

// Vertex partition of the cell: left edge, right edge (paired order) and the rest.
struct CellPartition
{
  std::vector<int> left, right, interior;
  std::vector<int> pos;  // position within interior, -1 otherwise
  int b() const { return static_cast<int>(left.size()); }
};

CellPartition Partition(const CellMesh &mesh, BoundaryCondition bc)
{
  CellPartition cp;
  auto excluded = [&](int v)
  {
    return bc == BoundaryCondition::dirichlet &&
           (mesh.boundary_tags[v] & (tag_bottom | tag_top));
  };
  std::vector<char> edge(mesh.NumVertices(), 0);
  for (const auto &[l, r] : mesh.left_right_pairs)
  {
    edge[l] = edge[r] = 1;
    if (!excluded(l))
    {
      cp.left.push_back(l);
      cp.right.push_back(r);
    }
  }
  cp.pos.assign(mesh.NumVertices(), -1);
  for (int v = 0; v < mesh.NumVertices(); v++)
  {
    if (!edge[v] && !excluded(v))
    {
      cp.pos[v] = static_cast<int>(cp.interior.size());
      cp.interior.push_back(v);
    }
  }
  return cp;
}

SpMat Extract(const SpMat &A, const std::vector<int> &rows, const std::vector<int> &cols)
{
  std::vector<int> rpos(A.rows(), -1), cpos(A.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); i++)
  {
    rpos[rows[i]] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < cols.size(); i++)
  {
    cpos[cols[i]] = static_cast<int>(i);
  }
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int j = 0; j < A.outerSize(); j++)
  {
    if (cpos[j] < 0)
    {
      continue;
    }
    for (SpMat::InnerIterator it(A, j); it; ++it)
    {
      if (rpos[it.row()] >= 0)
      {
        trip.emplace_back(rpos[it.row()], cpos[j], it.value());
      }
    }
  }
  SpMat B(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  B.setFromTriplets(trip.begin(), trip.end());
  B.makeCompressed();
  return B;
}

// One cell condensed onto its edges, ordered [left; right].
struct CondensedCell
{
  Mat S;
  Vec g;  // condensed load
  SpMat A_IB;
  Vec f_I;
  SparseLU lu_II;

  Vec Interior(const Vec &trace) const
  {
    const Vec rhs = f_I - A_IB * trace;
    return lu_II.Solve(rhs);
  }
};

CondensedCell Condense(const SpMat &A, const Vec &f, const CellPartition &cp)
{
  std::vector<int> B = cp.left;
  B.insert(B.end(), cp.right.begin(), cp.right.end());
  CondensedCell cc;
  const SpMat A_II = Extract(A, cp.interior, cp.interior);
  cc.A_IB = Extract(A, cp.interior, B);
  const SpMat A_BI = Extract(A, B, cp.interior);
  const Mat A_BB = Mat(Extract(A, B, B));
  cc.lu_II.Factor(A_II);
  const int nb = static_cast<int>(B.size());
  const int ni = static_cast<int>(cp.interior.size());
  Mat X(ni, nb);
  for (int j = 0; j < nb; j++)
  {
    X.col(j) = cc.lu_II.Solve(Vec(cc.A_IB.col(j)));
  }
  cc.S = A_BB - A_BI * X;
  cc.f_I = Vec(ni);
  for (int i = 0; i < ni; i++)
  {
    cc.f_I[i] = f[cp.interior[i]];
  }
  Vec f_B(nb);
  for (int i = 0; i < nb; i++)
  {
    f_B[i] = f[B[i]];
  }
  cc.g = f_B - A_BI * cc.lu_II.Solve(cc.f_I);
  return cc;
}

FieldOnCell Scatter(const CellMesh &mesh, const CellPartition &cp, int cell, const Vec &trace,
                    const Vec &interior)
{
  FieldOnCell u;
  u.cell_index = cell;
  u.values = Vec::Zero(mesh.NumVertices());
  const int b = cp.b();
  for (int i = 0; i < b; i++)
  {
    u.values[cp.left[i]] = trace[i];
    u.values[cp.right[i]] = trace[b + i];
  }
  for (std::size_t i = 0; i < cp.interior.size(); i++)
  {
    u.values[cp.interior[i]] = interior[i];
  }
  return u;
}

std::vector<double> SampleAtQuad(const CellQuadrature &quad, const CoefficientField &c)
{
  std::vector<double> out(quad.Size());
  for (int i = 0; i < quad.Size(); i++)
  {
    out[i] = c(quad.points[i].x1, quad.points[i].x2);
  }
  return out;
}

Vec LoadF(const CellMesh &mesh, const CellQuadrature &quad, const CoefficientField &f)
{
  Vec F = Vec::Zero(mesh.NumVertices());
  for (int t = 0; t < mesh.NumTriangles(); t++)
  {
    for (int q = 0; q < 3; q++)
    {
      const int i = 3 * t + q;
      const double fv = f(quad.points[i].x1, quad.points[i].x2);
      if (fv == 0.0)
      {
        continue;
      }
      for (int a = 0; a < 3; a++)
      {
        F[mesh.triangles[t][a]] -= quad.weights[i] * fv * CellQuadrature::bary[q][a];
      }
    }
  }
  return F;
}

void CheckOracleInput(const ScatteringProblem &prob, double epsilon)
{
  if (!(epsilon > 0.0))
  {
    throw Error(ErrorCode::invalid_argument, "damping epsilon must be positive");
  }
  for (const CoefficientField *c : {&prob.q, &prob.f})
  {
    if (c->support_box &&
        (c->support_box->x1_min < -0.5 - 1e-12 || c->support_box->x1_max > 0.5 + 1e-12))
    {
      throw Error(ErrorCode::support, "q and f must be supported in the reference cell");
    }
  }
}

}  // namespace

const FieldOnCell &TruncatedRun::Cell(int c) const
{
  for (const auto &f : fields)
  {
    if (f.cell_index == c)
    {
      return f;
    }
  }
  throw Error(ErrorCode::missing_artifact, "cell " + std::to_string(c) + " was not kept");
}

int DefaultTruncation(double epsilon, int max_R)
{
  const double r = std::ceil(20.0 / epsilon);
  return static_cast<int>(std::clamp(r, 5.0, static_cast<double>(max_R)));
}

TruncatedRun DampedTruncatedSolve(const ScatteringProblem &prob, const CellMesh &mesh,
                                  double epsilon, const OracleOptions &opts)
{
  CheckOracleInput(prob, epsilon);
  const int R0 = opts.R > 0 ? opts.R : DefaultTruncation(epsilon, opts.max_R);
  if (R0 < 5)
  {
    throw Error(ErrorCode::invalid_argument, "truncation R must be at least 5");
  }
  const int keep = std::clamp(opts.keep_cells, 0, R0 - 1);
  const CellQuadrature quad = BuildQuadrature(mesh);
  const CellPartition cp = Partition(mesh, prob.bc);
  const cplx kappa2(prob.k * prob.k, epsilon);
  const std::vector<double> nq = SampleAtQuad(quad, prob.n);
  std::vector<double> nqq = nq;
  const std::vector<double> qq = SampleAtQuad(quad, prob.q);
  for (std::size_t i = 0; i < nqq.size(); i++)
  {
    nqq[i] += qq[i];
  }
  const Vec zero = Vec::Zero(mesh.NumVertices());
  const CondensedCell outer = Condense(AssembleDampedCell(mesh, quad, nq, kappa2), zero, cp);
  const CondensedCell center =
      Condense(AssembleDampedCell(mesh, quad, nqq, kappa2), LoadF(mesh, quad, prob.f), cp);
  const int b = cp.b();
  const Mat S_LL = outer.S.topLeftCorner(b, b), S_LR = outer.S.topRightCorner(b, b);
  const Mat S_RL = outer.S.bottomLeftCorner(b, b), S_RR = outer.S.bottomRightCorner(b, b);

  // T[m]: cells m..R seen from the left edge of cell m; Ul[m]: cells -R..-m seen from the
  // right edge of cell -m. Both come from iterating one map away from the Dirichlet end,
  // so a longer truncation only continues the iteration. Only m <= keep + 1 are stored.
  std::deque<Mat> T{S_LL}, Ul{S_RR};
  int done = 1;
  auto extend = [&](int target)
  {
    for (; done < target; done++)
    {
      T.push_front(S_LL - S_LR * Eigen::PartialPivLU<Mat>(S_RR + T.front()).solve(S_RL));
      Ul.push_front(S_RR - S_RL * Eigen::PartialPivLU<Mat>(S_LL + Ul.front()).solve(S_LR));
      if (static_cast<int>(T.size()) > keep + 1)
      {
        T.pop_back();
        Ul.pop_back();
      }
    }
  };
  // Index m >= 1 of the stored maps, zero (Dirichlet) beyond R.
  auto Tm = [&](int m) { return T[m - 1]; };
  auto Um = [&](int m) { return Ul[m - 1]; };
  Vec x0;
  double indicator = 0.0;
  int R = R0;
  for (int attempt = 0;; attempt++)
  {
    extend(R);
    Mat K = center.S;
    K.topLeftCorner(b, b) += Um(1);
    K.bottomRightCorner(b, b) += Tm(1);
    x0 = Eigen::PartialPivLU<Mat>(K).solve(center.g);
    // Decay over R cells with the converged one-cell transfer maps.
    const Mat Xr = Eigen::PartialPivLU<Mat>(S_RR + Tm(1)).solve(S_RL);
    const Mat Xl = Eigen::PartialPivLU<Mat>(S_LL + Um(1)).solve(S_LR);
    Vec yr = x0.tail(b), yl = x0.head(b);
    const double nr = std::max(yr.norm(), 1e-300), nl = std::max(yl.norm(), 1e-300);
    double log_r = 0.0, log_l = 0.0;
    for (int m = 0; m < R; m++)
    {
      yr = Xr * yr;
      yl = Xl * yl;
      // Renormalize to avoid underflow on long chains.
      const double a = yr.norm(), c = yl.norm();
      if (a > 0.0)
      {
        log_r += std::log(a);
        yr /= a;
      }
      else
      {
        log_r = -1e300;
      }
      if (c > 0.0)
      {
        log_l += std::log(c);
        yl /= c;
      }
      else
      {
        log_l = -1e300;
      }
    }
    const double lr = log_r - std::log(nr), ll = log_l - std::log(nl);
    const double log_ind = x0.norm() == 0.0 ? -1e300 : std::max(lr, ll);
    indicator = std::exp(log_ind);
    const double log_thr = std::log(opts.decay_threshold);
    if (log_ind <= log_thr)
    {
      break;
    }
    const int needed = static_cast<int>(std::ceil(1.1 * R * log_thr / log_ind)) + 1;
    if (opts.R > 0 || attempt >= 3 || needed > opts.max_R || !(log_ind < 0.0))
    {
      throw Error(ErrorCode::enlarge_R,
                  "damped field has not decayed at the truncation (indicator " +
                      std::to_string(indicator) + "); enlarge R beyond " + std::to_string(R));
    }
    R = std::max(needed, R + 1);
  }

  TruncatedRun run;
  run.epsilon = epsilon;
  run.R = R;
  run.h = mesh.h;
  std::vector<FieldOnCell> left_cells, right_cells;
  Vec right_trace = x0.tail(b), left_trace = x0.head(b);
  for (int m = 1; m <= keep; m++)
  {
    Vec z = Vec::Zero(b);
    if (m < R)
    {
      z = -Eigen::PartialPivLU<Mat>(S_RR + Tm(m + 1)).solve(S_RL * right_trace);
    }
    Vec tr(2 * b);
    tr << right_trace, z;
    right_cells.push_back(Scatter(mesh, cp, m, tr, outer.Interior(tr)));
    right_trace = z;

    Vec w = Vec::Zero(b);
    if (m < R)
    {
      w = -Eigen::PartialPivLU<Mat>(S_LL + Um(m + 1)).solve(S_LR * left_trace);
    }
    Vec tl(2 * b);
    tl << w, left_trace;
    left_cells.push_back(Scatter(mesh, cp, -m, tl, outer.Interior(tl)));
    left_trace = w;
  }
  for (auto it = left_cells.rbegin(); it != left_cells.rend(); ++it)
  {
    run.fields.push_back(std::move(*it));
  }
  run.fields.push_back(Scatter(mesh, cp, 0, x0, center.Interior(x0)));
  for (auto &f : right_cells)
  {
    run.fields.push_back(std::move(f));
  }
  const SpMat Mv = AssembleVertexMass(mesh);
  for (const auto &f : run.fields)
  {
    run.cell_norms.push_back(L2Norm(Mv, f.values));
  }

  run.decay_indicator = indicator;
  return run;
}

TruncatedRun DampedTruncatedSolveMonolithic(const ScatteringProblem &prob,
                                            const CellMesh &mesh, double epsilon, int R,
                                            int keep_cells)
{
  CheckOracleInput(prob, epsilon);
  const CellQuadrature quad = BuildQuadrature(mesh);
  const CellPartition cp = Partition(mesh, prob.bc);
  const cplx kappa2(prob.k * prob.k, epsilon);
  const std::vector<double> nq = SampleAtQuad(quad, prob.n);
  std::vector<double> nqq = nq;
  const std::vector<double> qq = SampleAtQuad(quad, prob.q);
  for (std::size_t i = 0; i < nqq.size(); i++)
  {
    nqq[i] += qq[i];
  }
  const SpMat Aout = AssembleDampedCell(mesh, quad, nq, kappa2);
  const SpMat Acen = AssembleDampedCell(mesh, quad, nqq, kappa2);
  const Vec Fcen = LoadF(mesh, quad, prob.f);

  // Global numbering: per cell, left edge shared with the previous cell's right edge.
  const int nv = mesh.NumVertices();
  const int ncell = 2 * R + 1;
  std::vector<int> local_right(nv, -1);
  const int b = cp.b();
  for (int i = 0; i < b; i++)
  {
    local_right[cp.right[i]] = i;
  }
  std::vector<int> left_index(nv, -1);
  for (int i = 0; i < b; i++)
  {
    left_index[cp.left[i]] = i;
  }
  const int per_cell = static_cast<int>(cp.interior.size()) + b;  // interior + right edge
  const int n_total = b + ncell * per_cell;
  auto global = [&](int cell_pos, int v) -> int
  {
    if (left_index[v] >= 0)
    {
      return cell_pos == 0 ? left_index[v] : b + (cell_pos - 1) * per_cell +
                                                 static_cast<int>(cp.interior.size()) +
                                                 left_index[v];
    }
    if (local_right[v] >= 0)
    {
      return b + cell_pos * per_cell + static_cast<int>(cp.interior.size()) + local_right[v];
    }
    if (cp.pos[v] >= 0)
    {
      return b + cell_pos * per_cell + cp.pos[v];
    }
    return -1;
  };
  auto dirichlet = [&](int g)
  { return g < b || g >= b + (ncell - 1) * per_cell + static_cast<int>(cp.interior.size()); };
  std::vector<Eigen::Triplet<cplx>> trip;
  Vec rhs = Vec::Zero(n_total);
  for (int pos = 0; pos < ncell; pos++)
  {
    const SpMat &A = (pos == R) ? Acen : Aout;
    for (int j = 0; j < A.outerSize(); j++)
    {
      const int gj = global(pos, j);
      if (gj < 0 || dirichlet(gj))
      {
        continue;
      }
      for (SpMat::InnerIterator it(A, j); it; ++it)
      {
        const int gi = global(pos, static_cast<int>(it.row()));
        if (gi >= 0 && !dirichlet(gi))
        {
          trip.emplace_back(gi, gj, it.value());
        }
      }
    }
    if (pos == R)
    {
      for (int v = 0; v < nv; v++)
      {
        const int g = global(pos, v);
        if (g >= 0 && !dirichlet(g))
        {
          rhs[g] += Fcen[v];
        }
      }
    }
  }
  for (int g = 0; g < n_total; g++)
  {
    if (dirichlet(g))
    {
      trip.emplace_back(g, g, 1.0);
    }
  }
  SpMat K(n_total, n_total);
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();
  SparseLU lu;
  lu.Factor(K);
  const Vec x = lu.Solve(rhs);

  TruncatedRun run;
  run.epsilon = epsilon;
  run.R = R;
  run.h = mesh.h;
  const SpMat Mv = AssembleVertexMass(mesh);
  for (int c = -keep_cells; c <= keep_cells; c++)
  {
    FieldOnCell u;
    u.cell_index = c;
    u.values = Vec::Zero(nv);
    for (int v = 0; v < nv; v++)
    {
      const int g = global(c + R, v);
      if (g >= 0)
      {
        u.values[v] = x[g];
      }
    }
    run.cell_norms.push_back(L2Norm(Mv, u.values));
    run.fields.push_back(std::move(u));
  }
  return run;
}

LapExtrapolation LapExtrapolate(const std::vector<TruncatedRun> &runs, const SpMat &vertex_mass,
                                int cell)
{
  const int n = static_cast<int>(runs.size());
  if (n < 3)
  {
    throw Error(ErrorCode::invalid_argument, "extrapolation needs at least three runs");
  }
  for (int i = 1; i < n; i++)
  {
    if (!(runs[i].epsilon < runs[i - 1].epsilon))
    {
      throw Error(ErrorCode::invalid_argument, "runs must be sorted by decreasing epsilon");
    }
  }
  std::vector<const Vec *> u;
  for (const auto &r : runs)
  {
    u.push_back(&r.Cell(cell).values);
  }
  // Lagrange weights at eps = 0 over runs [first, n).
  auto extrapolate = [&](int first)
  {
    Vec out = Vec::Zero(u[0]->size());
    for (int i = first; i < n; i++)
    {
      double w = 1.0;
      for (int j = first; j < n; j++)
      {
        if (j != i)
        {
          w *= runs[j].epsilon / (runs[j].epsilon - runs[i].epsilon);
        }
      }
      out += w * *u[i];
    }
    return out;
  };
  LapExtrapolation ex;
  ex.field.cell_index = cell;
  ex.field.values = extrapolate(0);
  const double ref = std::max(L2Norm(vertex_mass, *u[n - 1]), 1e-300);
  for (int i = 0; i + 1 < n; i++)
  {
    ex.successive_diffs.push_back(L2Norm(vertex_mass, Vec(*u[i] - *u[i + 1])) / ref);
  }
  for (std::size_t i = 1; i < ex.successive_diffs.size(); i++)
  {
    if (ex.successive_diffs[i] >= ex.successive_diffs[i - 1] && ex.successive_diffs[i] > 1e-14)
    {
      throw Error(ErrorCode::no_convergence,
                  "damped solutions do not settle as epsilon decreases; a standing wave or a "
                  "trapped mode may be present");
    }
  }
  const double nf = std::max(L2Norm(vertex_mass, ex.field.values), 1e-300);
  ex.error_indicator =
      (L2Norm(vertex_mass, ex.field.values) == 0.0)
          ? 0.0
          : L2Norm(vertex_mass, Vec(ex.field.values - extrapolate(1))) / nf;
  return ex;
}

std::vector<double> ConstantModes::ExceptionalValues() const
{
  std::vector<double> out;
  for (const auto &m : modes)
  {
    out.push_back(m.beta_hat);
  }
  return out;
}

ConstantModes AnalyticConstantModes(double n0, double k, BoundaryCondition bc)
{
  if (!(n0 > 0.0) || !(k > 0.0))
  {
    throw Error(ErrorCode::invalid_argument, "n0 and k must be positive");
  }
  ConstantModes cm;
  const double kn = k * k * n0;
  for (int m = (bc == BoundaryCondition::neumann ? 0 : 1); m * m * pi * pi <= kn * (1 + 1e-12);
       m++)
  {
    const double gap = kn - m * m * pi * pi;
    if (std::abs(gap) <= 1e-12 * kn)
    {
      cm.standing_wave_boundary = true;
      continue;
    }
    const double beta = std::sqrt(gap);
    const double cross = (m == 0) ? 1.0 : 0.5;
    const double amp = 1.0 / std::sqrt(2.0 * k * n0 * cross);
    for (double s : {-1.0, 1.0})
    {
      ConstantMode mode;
      mode.m = m;
      mode.beta = s * beta;
      mode.beta_hat = WrapToPi(s * beta);
      mode.lambda = s * beta / (k * n0);
      mode.amplitude = amp;
      cm.modes.push_back(mode);
    }
  }
  std::sort(cm.modes.begin(), cm.modes.end(),
            [](const ConstantMode &a, const ConstantMode &b) { return a.beta_hat < b.beta_hat; });
  return cm;
}

}  // namespace lapwave
