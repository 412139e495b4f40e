// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lapwave/fem.hpp"

#include <cmath>
#include <string>

namespace lapwave
{

namespace
{

using Triplet = Eigen::Triplet<cplx>;

template <typename Local>
SpMat AssembleWith(const CellMesh &mesh, const PeriodicBasis &basis, Local &&local)
{
  std::vector<Triplet> trip;
  trip.reserve(9 * mesh.triangles.size());
  for (int t = 0; t < mesh.NumTriangles(); t++)
  {
    const auto &tri = mesh.triangles[t];
    for (int a = 0; a < 3; a++)
    {
      const int row = basis.dof_of_node[tri[a]];
      if (row < 0)
      {
        continue;
      }
      for (int b = 0; b < 3; b++)
      {
        const int col = basis.dof_of_node[tri[b]];
        if (col < 0)
        {
          continue;
        }
        trip.emplace_back(row, col, local(t, a, b));
      }
    }
  }
  SpMat A(basis.m_prime, basis.m_prime);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

std::vector<double> Sample(const CellQuadrature &quad, const CoefficientField &w)
{
  std::vector<double> v(quad.Size());
  for (int i = 0; i < quad.Size(); i++)
  {
    v[i] = w(quad.points[i].x1, quad.points[i].x2);
  }
  return v;
}

double WeightedMassEntry(const CellQuadrature &quad, const std::vector<double> &w, int t,
                         int a, int b)
{
  double s = 0.0;
  for (int q = 0; q < 3; q++)
  {
    const int i = 3 * t + q;
    s += quad.weights[i] * w[i] * CellQuadrature::bary[q][a] * CellQuadrature::bary[q][b];
  }
  return s;
}

}  // namespace

SpMat PencilMatrices::Evaluate(cplx alpha, double k) const
{
  SpMat A = A1;
  const int nnz = static_cast<int>(A.nonZeros());
  const cplx a2 = alpha * alpha;
  const double k2 = k * k;
  cplx *out = A.valuePtr();
  const cplx *v2 = A2.valuePtr(), *v3 = A3.valuePtr(), *v4 = A4.valuePtr();
  for (int i = 0; i < nnz; i++)
  {
    out[i] += alpha * v2[i] + a2 * v3[i] + k2 * v4[i];
  }
  return A;
}

PencilMatrices AssemblePencil(const CellMesh &mesh, const PeriodicBasis &basis,
                              const CoefficientField &n)
{
  const CellQuadrature quad = BuildQuadrature(mesh);
  const std::vector<double> nq = Sample(quad, n);
  const std::vector<double> one(quad.Size(), 1.0);
  PencilMatrices P;
  P.A1 = AssembleWith(mesh, basis,
                      [&](int t, int a, int b)
                      {
                        const auto &ga = quad.grad[3 * t + a], &gb = quad.grad[3 * t + b];
                        return cplx(mesh.TriangleArea(t) * (ga[0] * gb[0] + ga[1] * gb[1]));
                      });
  // Row a is the test function, column b the trial function.
  P.A2 = AssembleWith(mesh, basis,
                      [&](int t, int a, int b)
                      {
                        const double d = quad.grad[3 * t + b][0] - quad.grad[3 * t + a][0];
                        return -I * (mesh.TriangleArea(t) / 3.0) * d;
                      });
  P.A3 = AssembleWith(mesh, basis, [&](int t, int a, int b)
                      { return cplx(WeightedMassEntry(quad, one, t, a, b)); });
  P.A4 = AssembleWith(mesh, basis, [&](int t, int a, int b)
                      { return cplx(-WeightedMassEntry(quad, nq, t, a, b)); });
  return P;
}

Discretization Discretize(const CoefficientField &n, double h, BoundaryCondition bc)
{
  Discretization d;
  auto [mesh, basis] = BuildCellMesh(h, bc);
  d.mesh = std::move(mesh);
  d.basis = std::move(basis);
  d.P = AssemblePencil(d.mesh, d.basis, n);
  d.h = h;
  return d;
}

SpMat AssembleCellOperatorDirect(const CellMesh &mesh, const PeriodicBasis &basis,
                                 const CoefficientField &n, cplx alpha, double k)
{
  const CellQuadrature quad = BuildQuadrature(mesh);
  const std::vector<double> nq = Sample(quad, n);
  return AssembleWith(mesh, basis,
                      [&](int t, int a, int b)
                      {
                        cplx s = 0.0;
                        const auto &ga = quad.grad[3 * t + a], &gb = quad.grad[3 * t + b];
                        for (int q = 0; q < 3; q++)
                        {
                          const int i = 3 * t + q;
                          const double la = CellQuadrature::bary[q][a];
                          const double lb = CellQuadrature::bary[q][b];
                          // (d1 v + i alpha v)(d1 psi - i alpha psi) + d2 v d2 psi - k^2 n v psi
                          s += quad.weights[i] * ((gb[0] + I * alpha * lb) * (ga[0] - I * alpha * la) +
                                                  gb[1] * ga[1] - k * k * nq[i] * la * lb);
                        }
                        return s;
                      });
}

SpMat AssembleWeightedMass(const CellMesh &mesh, const PeriodicBasis &basis,
                           const CoefficientField &w)
{
  const CellQuadrature quad = BuildQuadrature(mesh);
  const std::vector<double> wq = Sample(quad, w);
  SpMat M = AssembleWith(mesh, basis, [&](int t, int a, int b)
                         { return cplx(WeightedMassEntry(quad, wq, t, a, b)); });
  M.prune(cplx(0.0));
  return M;
}

SpMat AssembleVertexMass(const CellMesh &mesh)
{
  PeriodicBasis identity;
  identity.m_prime = mesh.NumVertices();
  identity.dof_of_node.resize(mesh.NumVertices());
  for (int v = 0; v < mesh.NumVertices(); v++)
  {
    identity.dof_of_node[v] = v;
  }
  const CellQuadrature quad = BuildQuadrature(mesh);
  const std::vector<double> one(quad.Size(), 1.0);
  return AssembleWith(mesh, identity, [&](int t, int a, int b)
                      { return cplx(WeightedMassEntry(quad, one, t, a, b)); });
}

Vec AssembleModulatedLoad(const CellMesh &mesh, const PeriodicBasis &basis,
                          const CoefficientField &g, cplx alpha, int cell_shift)
{
  if (g.support_box)
  {
    const Box &b = *g.support_box;
    const double lo = cell_shift - 0.5 - 1e-12, hi = cell_shift + 0.5 + 1e-12;
    if (b.x1_min < lo || b.x1_max > hi)
    {
      throw Error(ErrorCode::support,
                  "load support leaves cell " + std::to_string(cell_shift));
    }
  }
  const CellQuadrature quad = BuildQuadrature(mesh);
  std::vector<cplx> gq(quad.Size());
  for (int i = 0; i < quad.Size(); i++)
  {
    gq[i] = g(quad.points[i].x1 + cell_shift, quad.points[i].x2);
  }
  return AssembleModulatedLoad(mesh, basis, quad, gq, alpha, cell_shift);
}

Vec AssembleModulatedLoad(const CellMesh &mesh, const PeriodicBasis &basis,
                          const CellQuadrature &quad, const std::vector<cplx> &g_at_quad,
                          cplx alpha, int cell_shift)
{
  if (static_cast<int>(g_at_quad.size()) != quad.Size())
  {
    throw Error(ErrorCode::dimension_mismatch, "quadrature field has wrong length");
  }
  Vec F = Vec::Zero(basis.m_prime);
  for (int t = 0; t < mesh.NumTriangles(); t++)
  {
    const auto &tri = mesh.triangles[t];
    for (int q = 0; q < 3; q++)
    {
      const int i = 3 * t + q;
      if (g_at_quad[i] == 0.0)
      {
        continue;
      }
      const cplx val = -quad.weights[i] * std::exp(-I * alpha * (quad.points[i].x1 + cell_shift)) *
                       g_at_quad[i];
      for (int a = 0; a < 3; a++)
      {
        const int dof = basis.dof_of_node[tri[a]];
        if (dof >= 0)
        {
          F[dof] += val * CellQuadrature::bary[q][a];
        }
      }
    }
  }
  return F;
}

Vec SolveCell(const PencilMatrices &P, cplx alpha, double k, const Vec &rhs)
{
  if (rhs.size() != P.Size())
  {
    throw Error(ErrorCode::dimension_mismatch, "cell right-hand side has wrong length");
  }
  SparseLU lu;
  try
  {
    lu.Factor(P.Evaluate(alpha, k));
  }
  catch (const Error &)
  {
    throw Error(ErrorCode::singular_cell_problem,
                "A(alpha, k) is singular at alpha = " + std::to_string(alpha.real()) + " + " +
                    std::to_string(alpha.imag()) + "i");
  }
  const double rcond = lu.ReciprocalCondition();
  if (rcond < singular_rcond_threshold)
  {
    throw Error(ErrorCode::singular_cell_problem,
                "A(alpha, k) is near-singular (rcond " + std::to_string(rcond) +
                    ") at alpha = " + std::to_string(alpha.real()) + " + " +
                    std::to_string(alpha.imag()) + "i");
  }
  return lu.Solve(rhs);
}

double L2Norm(const SpMat &vertex_mass, const Vec &values)
{
  return std::sqrt(std::max(0.0, std::real(values.dot(vertex_mass * values))));
}

double RelativeL2Difference(const SpMat &vertex_mass, const Vec &a, const Vec &b)
{
  const double nb = L2Norm(vertex_mass, b);
  return L2Norm(vertex_mass, a - b) / (nb > 0.0 ? nb : 1.0);
}

Vec PeriodicToVertex(const PeriodicBasis &basis, const Vec &dof_values)
{
  Vec v = Vec::Zero(static_cast<int>(basis.dof_of_node.size()));
  for (std::size_t i = 0; i < basis.dof_of_node.size(); i++)
  {
    const int d = basis.dof_of_node[i];
    if (d >= 0)
    {
      v[i] = dof_values[d];
    }
  }
  return v;
}

cplx InterpolateVertexField(const CellMesh &mesh, const PointLocator &locator,
                            const Vec &values, double x1, double x2)
{
  int t = 0;
  std::array<double, 3> l{};
  if (!locator.Locate(x1, x2, t, l))
  {
    throw Error(ErrorCode::invalid_argument, "point outside the reference cell");
  }
  const auto &tri = mesh.triangles[t];
  return l[0] * values[tri[0]] + l[1] * values[tri[1]] + l[2] * values[tri[2]];
}

}  // namespace lapwave
