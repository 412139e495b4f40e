// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <gtest/gtest.h>
#include "lapwave/cci.hpp"
#include "lapwave/problem.hpp"

namespace lapwave
{
namespace
{

TEST(CutoffZeta, PlateausAndMidpoint)
{
  EXPECT_DOUBLE_EQ(CutoffZeta(0.05, 0.1, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(CutoffZeta(0.35, 0.1, 0.3), 0.0);
  EXPECT_NEAR(CutoffZeta(0.2, 0.1, 0.3), 0.5, 1e-14);
}

TEST(CutoffZeta, RejectsEmptyInterval)
{
  EXPECT_THROW(CutoffZeta(0.2, 0.3, 0.3), Error);
  EXPECT_THROW(CutoffZeta(0.2, 0.4, 0.3), Error);
}

TEST(CutoffZeta, MonotoneAndFlatAtJoins)
{
  const double a = 0.1, b = 0.3;
  double prev = 1.0;
  for (int i = 0; i <= 400; i++)
  {
    const double t = a + (b - a) * i / 400.0;
    const double z = CutoffZeta(t, a, b);
    EXPECT_LE(z, prev + 1e-15);
    prev = z;
  }
  const double s = 1e-3;
  for (double t : {a, b})
  {
    const double d1 = (CutoffZeta(t + s, a, b) - CutoffZeta(t - s, a, b)) / (2 * s);
    const double d2 =
      (CutoffZeta(t + s, a, b) - 2 * CutoffZeta(t, a, b) + CutoffZeta(t - s, a, b)) / (s * s);
    // The ramp is C^4, so one-sided differences see the fifth-order term.
    EXPECT_LT(std::abs(d1), 1e-6);
    EXPECT_LT(std::abs(d2), 1e-3);
    EXPECT_LT(std::abs(CutoffZetaDerivs(t, a, b).d1), 1e-12);
    EXPECT_LT(std::abs(CutoffZetaDerivs(t, a, b).d2), 1e-12);
  }
}

TEST(CutoffZeta, AnalyticDerivativesMatchFiniteDifferences)
{
  const double a = 0.1, b = 0.3, s = 1e-5;
  for (double t : {0.13, 0.2, 0.27})
  {
    const RampValue r = CutoffZetaDerivs(t, a, b);
    EXPECT_NEAR(r.value, CutoffZeta(t, a, b), 1e-15);
    EXPECT_NEAR(r.d1, (CutoffZeta(t + s, a, b) - CutoffZeta(t - s, a, b)) / (2 * s), 1e-6);
    const RampValue rp = CutoffZetaDerivs(t + s, a, b), rm = CutoffZetaDerivs(t - s, a, b);
    EXPECT_NEAR(r.d2, (rp.d1 - rm.d1) / (2 * s), 1e-5);
  }
}

TEST(RampPsi, PlateausAndReflection)
{
  EXPECT_DOUBLE_EQ(RampPsi(2.0, +1).value, 1.0);
  EXPECT_DOUBLE_EQ(RampPsi(0.0, +1).value, 0.0);
  EXPECT_DOUBLE_EQ(RampPsi(-2.0, -1).value, 1.0);
  for (int i = -300; i <= 300; i++)
  {
    const double x = i / 100.0;
    EXPECT_EQ(RampPsi(x, -1).value, RampPsi(-x, +1).value);
    EXPECT_EQ(RampPsi(x, -1).d1, -RampPsi(-x, +1).d1);
    EXPECT_EQ(RampPsi(x, -1).d2, RampPsi(-x, +1).d2);
  }
}

TEST(Examples, PointValues)
{
  const ScatteringProblem e2 = ExampleProblem(ExampleId::example2);
  EXPECT_NEAR(e2.n(0.125, 0.3), 4.0, 1e-14);
  EXPECT_NEAR(e2.KSquared(), 12.0, 1e-12);
  const ScatteringProblem e1 = ExampleProblem(ExampleId::example1);
  EXPECT_NEAR(e1.q(0.2, 0.2), 2.0, 1e-14);
  EXPECT_NEAR(e1.KSquared(), 17.0, 1e-12);
  EXPECT_NEAR(e1.n(0.0, 0.5), 9.0, 1e-14);
  EXPECT_NEAR(e1.f(0.0, 0.5), 0.5, 1e-14);
  const ScatteringProblem r2 = ExampleProblem(ExampleId::remark2);
  EXPECT_TRUE(r2.q.IsZero());
  EXPECT_NEAR(r2.KSquared(), 3.2, 1e-12);
}

TEST(Examples, PositivityOnDenseGrid)
{
  const ScatteringProblem e1 = ExampleProblem(ExampleId::example1);
  double lo = 1e300;
  for (int i = 0; i < 200; i++)
  {
    for (int j = 0; j < 200; j++)
    {
      const double x1 = -0.5 + (i + 0.5) / 200.0, x2 = (j + 0.5) / 200.0;
      lo = std::min(lo, e1.n(x1, x2) + e1.q(x1, x2));
    }
  }
  EXPECT_GE(lo, 1.0);
  EXPECT_NO_THROW(ValidateProblem(e1));
  EXPECT_NO_THROW(ValidateProblem(ExampleProblem(ExampleId::example2)));
}

TEST(Examples, FieldInvariants)
{
  for (ExampleId id : {ExampleId::example1, ExampleId::example2, ExampleId::remark2})
  {
    const ScatteringProblem p = ExampleProblem(id);
    for (int i = 0; i < 50; i++)
    {
      const double x1 = -0.5 + i / 50.0, x2 = 0.013 + i / 52.0;
      EXPECT_NEAR(p.n(x1 + 1.0, x2), p.n(x1, x2), 1e-12);
      EXPECT_NEAR(p.n(x1 - 3.0, x2), p.n(x1, x2), 1e-12);
    }
    for (const CoefficientField *g : {&p.q, &p.f})
    {
      ASSERT_TRUE(g->support_box.has_value());
      for (int i = 0; i <= 60; i++)
      {
        for (int j = 0; j <= 60; j++)
        {
          const double x1 = -1.5 + 3.0 * i / 60.0, x2 = j / 60.0;
          if (!g->support_box->Contains(x1, x2))
          {
            EXPECT_EQ((*g)(x1, x2), 0.0);
          }
        }
      }
    }
  }
}

TEST(Examples, RampsAndPerturbationHaveDisjointSupport)
{
  const ScatteringProblem e1 = ExampleProblem(ExampleId::example1);
  const auto [mesh, basis] = BuildCellMesh(0.04, BoundaryCondition::neumann);
  for (const Point &p : mesh.vertices)
  {
    EXPECT_EQ(RampPsi(p.x1, +1).value * e1.q(p.x1, p.x2), 0.0);
    EXPECT_EQ(RampPsi(p.x1, -1).value * e1.q(p.x1, p.x2), 0.0);
  }
}

TEST(Validation, RejectsBadProblems)
{
  ScatteringProblem p = ExampleProblem(ExampleId::example1);
  p.q = RadialField(0.45, 0.5, 0.05, 0.1, 1.0, 0.0);
  try
  {
    ValidateProblem(p);
    FAIL() << "support outside the cell accepted";
  }
  catch (const Error &e)
  {
    EXPECT_EQ(e.code(), ErrorCode::support);
  }
  p = ExampleProblem(ExampleId::example1);
  p.q = RadialField(0.0, 0.5, 0.1, 0.2, -20.0, 0.0);
  EXPECT_THROW(ValidateProblem(p), Error);
}

TEST(TrappedMode, ZeroSourceGivesZeroPerturbation)
{
  const auto [mesh, basis] = BuildCellMesh(0.1, BoundaryCondition::neumann);
  FieldOnCell u{0, Vec::Ones(mesh.NumVertices())};
  const CoefficientField q = ConstructTrappedModePerturbation(u, mesh, ZeroField(), 2.0);
  EXPECT_TRUE(q.IsZero());
}

TEST(TrappedMode, VanishingFieldIsRejected)
{
  const ScatteringProblem r2 = ExampleProblem(ExampleId::remark2);
  const auto [mesh, basis] = BuildCellMesh(0.1, BoundaryCondition::neumann);
  FieldOnCell u{0, Vec::Zero(mesh.NumVertices())};
  u.values[0] = 1.0;
  try
  {
    ConstructTrappedModePerturbation(u, mesh, r2.f, r2.k);
    FAIL() << "degenerate division accepted";
  }
  catch (const Error &e)
  {
    EXPECT_EQ(e.code(), ErrorCode::division_degeneracy);
  }
}

TEST(TrappedMode, PerturbedIndexStaysPositive)
{
  ScatteringProblem prob = ExampleProblem(ExampleId::remark2);
  const Discretization d = Discretize(prob.n, 0.04, prob.bc);
  CciOptions opts;
  opts.N = 32;
  const CciSolution sol = CciSolve(prob, d, opts);
  prob.q = ConstructTrappedModePerturbation(sol.fields[0], d.mesh, prob.f, prob.k);
  double lo = 1e300;
  for (int i = 0; i <= 100; i++)
  {
    for (int j = 0; j <= 100; j++)
    {
      const double x1 = -0.5 + i / 100.0, x2 = j / 100.0;
      lo = std::min(lo, prob.n(x1, x2) + prob.q(x1, x2));
    }
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_NO_THROW(ValidateProblem(prob));
}

TEST(Config, ParsesProblemFile)
{
  const std::string path = ::testing::TempDir() + "/problem.cfg";
  {
    std::ofstream out(path);
    out << "# constant strip\n"
           "k_squared = 9\n"
           "bc = dirichlet\n"
           "n = constant:2\n"
           "q = radial:0.2,0.2,0.1,0.15,2,0\n"
           "f = radial:0,0.5,0.1,0.3,0.5,0\n";
  }
  const ScatteringProblem p = LoadProblemConfig(path);
  EXPECT_NEAR(p.k, 3.0, 1e-14);
  EXPECT_EQ(p.bc, BoundaryCondition::dirichlet);
  EXPECT_NEAR(p.n(0.3, 0.7), 2.0, 1e-15);
  EXPECT_NEAR(p.q(0.2, 0.2), 2.0, 1e-15);
  EXPECT_NEAR(p.f(0.0, 0.5), 0.5, 1e-15);
}

TEST(Config, RejectsUnknownFieldSpec)
{
  EXPECT_THROW(ParseFieldSpec("gaussian:1,2", false), Error);
  EXPECT_THROW(ParseFieldSpec("constant:abc", true), Error);
  EXPECT_THROW(ReadKeyValueFile("/nonexistent/file.cfg"), Error);
}

}  // namespace
}  // namespace lapwave
