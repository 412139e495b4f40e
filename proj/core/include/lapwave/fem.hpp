// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef LAPWAVE_FEM_HPP
#define LAPWAVE_FEM_HPP

#include <functional>
#include <memory>
#include <vector>
#include "lapwave/mesh.hpp"
#include "lapwave/problem.hpp"
#include "lapwave/sparse_lu.hpp"
#include "lapwave/types.hpp"

namespace lapwave
{

// A(alpha, k) = A1 + alpha A2 + alpha^2 A3 + k^2 A4 over the periodic DOFs. All four
// matrices share one sparsity pattern so that A(alpha, k) is a combination of value
// arrays.
struct PencilMatrices
{
  SpMat A1, A2, A3, A4;

  int Size() const { return static_cast<int>(A1.rows()); }
  SpMat Evaluate(cplx alpha, double k) const;
};

PencilMatrices AssemblePencil(const CellMesh &mesh, const PeriodicBasis &basis,
                              const CoefficientField &n);

// Mesh, periodic basis and pencil for one problem at one mesh size.
struct Discretization
{
  CellMesh mesh;
  PeriodicBasis basis;
  PencilMatrices P;
  double h = 0.0;
};

Discretization Discretize(const CoefficientField &n, double h, BoundaryCondition bc);

// Entries of A(alpha, k) assembled straight from the sesquilinear form, used to check the
// split into powers of alpha and k^2.
SpMat AssembleCellOperatorDirect(const CellMesh &mesh, const PeriodicBasis &basis,
                                 const CoefficientField &n, cplx alpha, double k);

// int w zeta_j zeta_j' over the reference cell.
SpMat AssembleWeightedMass(const CellMesh &mesh, const PeriodicBasis &basis,
                           const CoefficientField &w);

// Mass matrix over all mesh vertices, for L2 norms of non-periodic nodal fields.
SpMat AssembleVertexMass(const CellMesh &mesh);

// -int_{Omega_0} exp(-i alpha (x1 + shift)) g(x + shift e1) zeta_j'(x) dx.
// Throws a support error if g's support box leaves the cell Omega_shift.
Vec AssembleModulatedLoad(const CellMesh &mesh, const PeriodicBasis &basis,
                          const CoefficientField &g, cplx alpha, int cell_shift);

// Same load with g given at the quadrature points of the reference cell (already pulled
// back by the shift) and the phase exp(-i alpha (x1 + shift)).
Vec AssembleModulatedLoad(const CellMesh &mesh, const PeriodicBasis &basis,
                          const CellQuadrature &quad, const std::vector<cplx> &g_at_quad,
                          cplx alpha, int cell_shift);

// Solves A(alpha, k) v = rhs. Raises a singular-cell-problem error when the reciprocal
// condition estimate drops below 1e-12.
Vec SolveCell(const PencilMatrices &P, cplx alpha, double k, const Vec &rhs);

inline constexpr double singular_rcond_threshold = 1e-12;

// Nodal field on the cell Omega_c, one value per mesh vertex (right-boundary vertices
// carry their own value since the physical field is not periodic).
struct FieldOnCell
{
  int cell_index = 0;
  Vec values;
};

double L2Norm(const SpMat &vertex_mass, const Vec &values);

// Relative L2(Omega_0) difference ||a - b|| / ||b||.
double RelativeL2Difference(const SpMat &vertex_mass, const Vec &a, const Vec &b);

// Vertex values of a periodic DOF vector (Dirichlet-removed nodes get zero).
Vec PeriodicToVertex(const PeriodicBasis &basis, const Vec &dof_values);

// Evaluates a piecewise-linear vertex field at a point of the closed reference cell.
cplx InterpolateVertexField(const CellMesh &mesh, const PointLocator &locator,
                            const Vec &values, double x1, double x2);

}  // namespace lapwave

#endif  // LAPWAVE_FEM_HPP
