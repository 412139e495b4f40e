// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <gtest/gtest.h>
#include "lapwave/fem.hpp"
#include "lapwave/spectral.hpp"

namespace lapwave
{
namespace
{

double MaxAbs(const SpMat &A)
{
  double m = 0.0;
  for (int k = 0; k < A.outerSize(); k++)
  {
    for (SpMat::InnerIterator it(A, k); it; ++it)
    {
      m = std::max(m, std::abs(it.value()));
    }
  }
  return m;
}

class MeshSizes : public ::testing::TestWithParam<double>
{
};

TEST_P(MeshSizes, Invariants)
{
  const double h = GetParam();
  for (BoundaryCondition bc : {BoundaryCondition::neumann, BoundaryCondition::dirichlet})
  {
    const auto [mesh, basis] = BuildCellMesh(h, bc);
    EXPECT_NO_THROW(ValidateMesh(mesh));
    double area = 0.0;
    for (int t = 0; t < mesh.NumTriangles(); t++)
    {
      EXPECT_GT(mesh.TriangleArea(t), 0.0);
      area += mesh.TriangleArea(t);
    }
    EXPECT_NEAR(area, 1.0, 1e-12);
    EXPECT_LE(mesh.MaxEdge() / mesh.MinEdge(), 4.0);
    int left = 0, right = 0;
    for (std::uint8_t tag : mesh.boundary_tags)
    {
      left += (tag & tag_left) != 0;
      right += (tag & tag_right) != 0;
    }
    EXPECT_EQ(left, right);
    EXPECT_EQ(static_cast<int>(mesh.left_right_pairs.size()), left);
    for (auto [l, r] : mesh.left_right_pairs)
    {
      EXPECT_EQ(mesh.vertices[l].x2, mesh.vertices[r].x2);
      EXPECT_EQ(mesh.vertices[r].x1 - mesh.vertices[l].x1, 1.0);
      EXPECT_EQ(basis.dof_of_node[r], basis.dof_of_node[l]);
    }
    for (int v = 0; v < mesh.NumVertices(); v++)
    {
      const bool tb = (mesh.boundary_tags[v] & (tag_top | tag_bottom)) != 0;
      if (bc == BoundaryCondition::dirichlet && tb)
      {
        EXPECT_EQ(basis.dof_of_node[v], -1);
      }
      else
      {
        EXPECT_GE(basis.dof_of_node[v], 0);
      }
    }
    EXPECT_EQ(static_cast<int>(basis.node_of_dof.size()), basis.m_prime);
  }
}

INSTANTIATE_TEST_SUITE_P(Cell, MeshSizes, ::testing::Values(0.45, 0.25, 0.1, 0.04, 0.02));

TEST(Mesh, DofCountScalesWithH)
{
  const auto [coarse, b1] = BuildCellMesh(0.04, BoundaryCondition::neumann);
  const auto [fine, b2] = BuildCellMesh(0.02, BoundaryCondition::neumann);
  const double ratio = static_cast<double>(b2.m_prime) / b1.m_prime;
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
  EXPECT_THROW(BuildCellMesh(0.5, BoundaryCondition::neumann), Error);
}

TEST(Mesh, RoundTripsThroughFile)
{
  const auto [mesh, basis] = BuildCellMesh(0.1, BoundaryCondition::neumann);
  const std::string path = ::testing::TempDir() + "/cell.mesh";
  WriteMesh(mesh, path);
  const CellMesh back = ReadMesh(path);
  ASSERT_EQ(back.NumVertices(), mesh.NumVertices());
  ASSERT_EQ(back.NumTriangles(), mesh.NumTriangles());
  EXPECT_EQ(back.left_right_pairs, mesh.left_right_pairs);
  for (int v = 0; v < mesh.NumVertices(); v++)
  {
    EXPECT_EQ(back.vertices[v].x1, mesh.vertices[v].x1);
    EXPECT_EQ(back.vertices[v].x2, mesh.vertices[v].x2);
  }
}

TEST(Mesh, LocatorFindsEveryCentroid)
{
  const auto [mesh, basis] = BuildCellMesh(0.1, BoundaryCondition::neumann);
  const PointLocator loc(mesh);
  for (int t = 0; t < mesh.NumTriangles(); t++)
  {
    double x1 = 0.0, x2 = 0.0;
    for (int i : mesh.triangles[t])
    {
      x1 += mesh.vertices[i].x1 / 3.0;
      x2 += mesh.vertices[i].x2 / 3.0;
    }
    int tri = -1;
    std::array<double, 3> bary{};
    ASSERT_TRUE(loc.Locate(x1, x2, tri, bary));
    EXPECT_EQ(tri, t);
    for (double b : bary)
    {
      EXPECT_NEAR(b, 1.0 / 3.0, 1e-12);
    }
  }
  int tri;
  std::array<double, 3> bary;
  EXPECT_FALSE(loc.Locate(0.7, 0.5, tri, bary));
}

TEST(Pencil, StructureOfTheFourMatrices)
{
  const ScatteringProblem p = ExampleProblem(ExampleId::example1);
  const Discretization d = Discretize(p.n, 0.05, p.bc);
  for (const SpMat *A : {&d.P.A1, &d.P.A3, &d.P.A4})
  {
    double im = 0.0;
    for (int k = 0; k < A->outerSize(); k++)
    {
      for (SpMat::InnerIterator it(*A, k); it; ++it)
      {
        im = std::max(im, std::abs(it.value().imag()));
      }
    }
    EXPECT_EQ(im, 0.0);
    EXPECT_LT(MaxAbs(SpMat(*A - SpMat(A->transpose()))), 1e-14);
  }
  EXPECT_LT(MaxAbs(SpMat(d.P.A2 - SpMat(d.P.A2.adjoint()))), 1e-14);
  double re = 0.0;
  for (int k = 0; k < d.P.A2.outerSize(); k++)
  {
    for (SpMat::InnerIterator it(d.P.A2, k); it; ++it)
    {
      re = std::max(re, std::abs(it.value().real()));
    }
  }
  EXPECT_EQ(re, 0.0);
}

TEST(Pencil, HermitianForRealParameters)
{
  const ScatteringProblem p = ExampleProblem(ExampleId::example1);
  const Discretization d = Discretize(p.n, 0.05, p.bc);
  for (double alpha : {0.7, -2.1, 3.0})
  {
    const SpMat A = d.P.Evaluate(alpha, p.k);
    EXPECT_LT(MaxAbs(SpMat(A - SpMat(A.adjoint()))), 1e-12);
  }
  // A(-alpha) = A(alpha)^T and conj A(alpha) = A(-conj alpha) for complex alpha.
  const cplx a{0.4, 0.3};
  EXPECT_LT(MaxAbs(SpMat(d.P.Evaluate(-a, p.k) - SpMat(d.P.Evaluate(a, p.k).transpose()))),
            1e-12);
  EXPECT_LT(MaxAbs(SpMat(SpMat(d.P.Evaluate(a, p.k).conjugate()) -
                         d.P.Evaluate(-std::conj(a), p.k))),
            1e-12);
}

TEST(Pencil, ReconstructionMatchesDirectAssembly)
{
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ua(-3.0, 3.0), uk(0.5, 5.0);
  for (BoundaryCondition bc : {BoundaryCondition::neumann, BoundaryCondition::dirichlet})
  {
    const ScatteringProblem p = ExampleProblem(ExampleId::example2, bc);
    const Discretization d = Discretize(p.n, 0.1, bc);
    for (int trial = 0; trial < 5; trial++)
    {
      const cplx alpha{ua(rng), 0.1 * ua(rng)};
      const double k = uk(rng);
      const SpMat direct = AssembleCellOperatorDirect(d.mesh, d.basis, p.n, alpha, k);
      const SpMat split = d.P.Evaluate(alpha, k);
      EXPECT_LT(MaxAbs(SpMat(direct - split)), 1e-12 * std::max(1.0, MaxAbs(direct)));
    }
  }
}

TEST(Pencil, NeumannStiffnessKillsConstants)
{
  const Discretization d = Discretize(ConstantField(1.0), 0.05, BoundaryCondition::neumann);
  const Vec ones = Vec::Ones(d.P.Size());
  EXPECT_LT((d.P.A1 * ones).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(-(ones.transpose() * d.P.A4 * ones)(0, 0).real(), 1.0, 1e-12);
}

TEST(Pencil, EigenvaluesConvergeQuadratically)
{
  // Lowest nonzero alpha = 0 eigenvalue of -Delta / n on the cell, n = 2 + sin-type index.
  const CoefficientField n = ExampleProblem(ExampleId::example2).n;
  std::vector<double> mu;
  for (double h : {0.1, 0.05, 0.025})
  {
    const Discretization d = Discretize(n, h, BoundaryCondition::neumann);
    const DispersionDiagram dd = DispersionBranches(d.P, {0.0}, 3);
    mu.push_back(dd.branches[0][2]);
  }
  const double ratio = (mu[0] - mu[1]) / (mu[1] - mu[2]);
  EXPECT_GE(ratio, 3.0);
  EXPECT_LE(ratio, 5.0);
}

TEST(WeightedMass, ZeroOneAndSupport)
{
  const ScatteringProblem p = ExampleProblem(ExampleId::example1);
  const auto [mesh, basis] = BuildCellMesh(0.05, p.bc);
  EXPECT_EQ(MaxAbs(AssembleWeightedMass(mesh, basis, ZeroField())), 0.0);
  const Discretization unit = Discretize(ConstantField(1.0), 0.05, p.bc);
  EXPECT_LT(MaxAbs(SpMat(AssembleWeightedMass(mesh, basis, ConstantField(1.0)) + unit.P.A4)),
            1e-15);
  const SpMat Mq = AssembleWeightedMass(mesh, basis, p.q);
  cplx trace = 0.0;
  for (int i = 0; i < Mq.rows(); i++)
  {
    trace += Mq.coeff(i, i);
  }
  EXPECT_GT(trace.real(), 0.0);
  const Box box = *p.q.support_box;
  const double pad = 2.0 * mesh.MaxEdge();
  for (int k = 0; k < Mq.outerSize(); k++)
  {
    for (SpMat::InnerIterator it(Mq, k); it; ++it)
    {
      if (it.value() != 0.0)
      {
        const Point &v = mesh.vertices[basis.node_of_dof[it.row()]];
        EXPECT_TRUE(v.x1 > box.x1_min - pad && v.x1 < box.x1_max + pad &&
                    v.x2 > box.x2_min - pad && v.x2 < box.x2_max + pad);
      }
    }
  }
}

TEST(Load, PartitionOfUnityAndShift)
{
  const auto [mesh, basis] = BuildCellMesh(0.05, BoundaryCondition::neumann);
  EXPECT_EQ(AssembleModulatedLoad(mesh, basis, ZeroField(), 0.3, 0).norm(), 0.0);
  // The load carries the minus sign of the weak form.
  const Vec l0 = AssembleModulatedLoad(mesh, basis, ConstantField(1.0), 0.0, 0);
  EXPECT_NEAR(l0.sum().real(), -1.0, 1e-12);
  EXPECT_NEAR(l0.sum().imag(), 0.0, 1e-14);
  // A field living on Omega_1, pulled back by one period, picks up exp(-i alpha).
  CoefficientField g = RadialField(0.0, 0.5, 0.1, 0.3, 1.0, 0.0);
  CoefficientField g1;
  g1.evaluator = [g](double x1, double x2) { return g(x1 - 1.0, x2); };
  g1.support_box = Box{0.5, 1.5, 0.0, 1.0};
  const cplx alpha = I;
  const Vec a0 = AssembleModulatedLoad(mesh, basis, g, alpha, 0);
  const Vec a1 = AssembleModulatedLoad(mesh, basis, g1, alpha, 1);
  EXPECT_LT((a1 - std::exp(-I * alpha) * a0).norm(), 1e-12 * a0.norm());
  EXPECT_THROW(AssembleModulatedLoad(mesh, basis, g1, alpha, 0), Error);
}

TEST(SolveCell, ZeroRhsAndResidual)
{
  const Discretization d = Discretize(ConstantField(2.0), 0.05, BoundaryCondition::neumann);
  EXPECT_EQ(SolveCell(d.P, 0.3, 1.0, Vec::Zero(d.P.Size())).norm(), 0.0);
  Vec rhs = Vec::Zero(d.P.Size());
  for (int i = 0; i < rhs.size(); i++)
  {
    rhs[i] = cplx(std::sin(i), std::cos(3.0 * i));
  }
  const Vec v = SolveCell(d.P, 0.3, 1.0, rhs);
  EXPECT_LT((d.P.Evaluate(0.3, 1.0) * v - rhs).norm() / rhs.norm(), 1e-10);
}

TEST(SolveCell, ExceptionalValueIsSingular)
{
  const ScatteringProblem p = ExampleProblem(ExampleId::example1);
  const Discretization d = Discretize(p.n, 0.04, p.bc);
  const std::vector<ExceptionalValue> ev = FindExceptionalValues(d.P, p.k);
  ASSERT_FALSE(ev.empty());
  Vec rhs = Vec::Ones(d.P.Size());
  try
  {
    SolveCell(d.P, ev.back().beta_hat, p.k, rhs);
    FAIL() << "singular cell problem not detected";
  }
  catch (const Error &e)
  {
    EXPECT_EQ(e.code(), ErrorCode::singular_cell_problem);
  }
}

TEST(Norms, VertexMassIntegratesConstants)
{
  const auto [mesh, basis] = BuildCellMesh(0.05, BoundaryCondition::neumann);
  const SpMat Mv = AssembleVertexMass(mesh);
  EXPECT_NEAR(L2Norm(Mv, Vec::Ones(mesh.NumVertices())), 1.0, 1e-12);
  const Vec a = Vec::Constant(mesh.NumVertices(), cplx(1.0, 1.0));
  EXPECT_NEAR(RelativeL2Difference(Mv, 1.1 * a, a), 0.1, 1e-12);
}

TEST(Interpolation, ReproducesLinearFunctions)
{
  const auto [mesh, basis] = BuildCellMesh(0.1, BoundaryCondition::neumann);
  const PointLocator loc(mesh);
  Vec vals(mesh.NumVertices());
  for (int v = 0; v < mesh.NumVertices(); v++)
  {
    vals[v] = cplx(2.0 * mesh.vertices[v].x1 - mesh.vertices[v].x2, 0.5);
  }
  for (auto [x1, x2] : {std::pair{0.123, 0.456}, std::pair{-0.4, 0.9}, std::pair{0.5, 0.0}})
  {
    const cplx u = InterpolateVertexField(mesh, loc, vals, x1, x2);
    EXPECT_NEAR(u.real(), 2.0 * x1 - x2, 1e-12);
    EXPECT_NEAR(u.imag(), 0.5, 1e-12);
  }
}

}  // namespace
}  // namespace lapwave
