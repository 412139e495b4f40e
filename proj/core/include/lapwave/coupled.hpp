// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef LAPWAVE_COUPLED_HPP
#define LAPWAVE_COUPLED_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>
#include "lapwave/contour.hpp"
#include "lapwave/fem.hpp"
#include "lapwave/mesh.hpp"
#include "lapwave/sparse_lu.hpp"
#include "lapwave/types.hpp"

namespace lapwave
{

// Solver for the block-arrow system shared by both methods. With c = 1 / (2 pi N) and
// E_l = diag(exp(i alpha_l x1)) the unknowns (x_l, U, C) satisfy
//
//   A(alpha_l) x_l - k^2 alpha'_l Q_l U - sum_m C_m G_{m,l} = F_l,  l = 1..N
//   U - c sum_l E_l x_l = 0
//   C - D U = 0
//
// where Q_l is the alpha_l-modulated q-mass. U only enters through the vertices touching
// supp q, so the system is reduced onto those vertices (and C) by a Schur complement.
struct CoupledOptions
{
  enum class SchurMode
  {
    automatic,
    dense,
    iterative
  };
  SchurMode schur = SchurMode::automatic;
  int dense_threshold = 64;  // automatic picks the dense Schur block for p below this
  double gmres_tol = 1e-12;
  int gmres_max_iter = 200;
  double trapped_rcond = 1e-9;  // reciprocal condition below this flags a trapped mode
  int threads = 0;              // 0: hardware concurrency
  double cache_bytes = 2.0e9;   // factorizations kept between sweeps
  bool keep_bloch_field = false;
  std::vector<int> cells{0};    // cells on which to reconstruct the field
  bool verbose = false;
};

struct CoupledStats
{
  int coupling_size = 0;  // p, vertices touching supp q
  int unique_factorizations = 0;
  int sweeps = 0;
  int gmres_iterations = 0;
  double gmres_residual = 0.0;
  double schur_rcond = 1.0;
  double max_cell_residual = 0.0;
  std::string schur_path;
  double seconds = 0.0;
};

struct CoupledResult
{
  std::vector<FieldOnCell> fields;  // one per requested cell
  Vec U;                            // values at the coupling vertices
  Vec C;
  std::optional<BlochField> bloch;
  CoupledStats stats;
};

class CoupledSystem
{
public:
  CoupledSystem(const CellMesh &mesh, const PeriodicBasis &basis, const PencilMatrices &P,
                double k, const CoefficientField &q, std::vector<cplx> alpha,
                std::vector<cplx> dalpha);

  int NumNodes() const { return static_cast<int>(alpha_.size()); }
  cplx Alpha(int l) const { return alpha_[l]; }
  cplx DAlpha(int l) const { return dalpha_[l]; }
  const CellMesh &Mesh() const { return mesh_; }
  const PeriodicBasis &Basis() const { return basis_; }
  const CellQuadrature &Quadrature() const { return quad_; }

  // Mesh vertices touching supp q, in the order used for U.
  const std::vector<int> &CouplingVertices() const { return coupling_vertices_; }

  // Q_l U as a vector over periodic DOFs.
  Vec ApplyQ(int l, const Vec &U) const;

  using NodeVector = std::function<Vec(int l)>;
  using ExtraVector = std::function<Vec(int l, int m)>;

  // F_l, G_{m,l} and the I x p matrix D. num_extra may be zero.
  CoupledResult Solve(const NodeVector &F, int num_extra, const ExtraVector &G, const Mat &D,
                      const CoupledOptions &opts) const;

  // Assembles the whole system as one sparse matrix and solves it directly. Only meant for
  // small cross-checks.
  CoupledResult SolveMonolithic(const NodeVector &F, int num_extra, const ExtraVector &G,
                                const Mat &D, const std::vector<int> &cells) const;

private:
  const CellMesh &mesh_;
  const PeriodicBasis &basis_;
  const PencilMatrices &P_;
  double k_;
  std::vector<cplx> alpha_, dalpha_;
  CellQuadrature quad_;
  std::vector<int> coupling_vertices_;
  std::vector<int> local_of_vertex_;
  struct ActivePoint
  {
    double x1, wq;
    std::array<int, 3> local;  // index into U, -1 if the vertex carries no DOF
    std::array<int, 3> dof;
    int q;                     // quadrature point index within the triangle
  };
  std::vector<ActivePoint> active_;
};

}  // namespace lapwave

#endif  // LAPWAVE_COUPLED_HPP
