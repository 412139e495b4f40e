// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <gtest/gtest.h>
#include "lapwave/harness.hpp"

namespace lapwave
{
namespace
{

std::string Slurp(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string TempPath(const std::string &name)
{
  return (std::filesystem::path(::testing::TempDir()) / name).string();
}

template <class F>
ErrorCode CodeOf(F &&f)
{
  try
  {
    f();
  }
  catch (const Error &e)
  {
    return e.code();
  }
  return ErrorCode::invalid_argument;
}

TEST(RunConfig, ValidationMessages)
{
  RunConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.N = 6;
  EXPECT_NO_THROW(c.Validate());
  for (int bad : {2, 5, 0})
  {
    RunConfig b;
    b.N = bad;
    EXPECT_EQ(CodeOf([&] { b.Validate(); }), ErrorCode::config);
  }
  for (double bad : {0.0, 0.5, -0.1})
  {
    RunConfig b;
    b.h = bad;
    EXPECT_EQ(CodeOf([&] { b.Validate(); }), ErrorCode::config);
  }
  RunConfig d;
  d.method = Method::decomp;
  d.sigma = 0.0;
  EXPECT_EQ(CodeOf([&] { d.Validate(); }), ErrorCode::config);
  RunConfig e;
  e.epsilons = {0.1, 0.05};
  EXPECT_EQ(CodeOf([&] { e.Validate(); }), ErrorCode::config);
}

TEST(RunConfig, FileMirrorsFlags)
{
  const std::string path = TempPath("run.cfg");
  {
    std::ofstream out(path);
    out << "example = 2\nmethod = decomp\nh = 0.05\nN = 32\nsigma = 0.15\n"
           "cells = -1, 0, 2\nref-N = 128\nref_h = 0.01\nepsilons = 0.08,0.04,0.02\n"
           "bc = dirichlet\n";
  }
  const RunConfig c = ApplyConfigFile(RunConfig{}, ReadKeyValueFile(path));
  EXPECT_EQ(c.example, "2");
  EXPECT_EQ(c.method, Method::decomp);
  EXPECT_DOUBLE_EQ(c.h, 0.05);
  EXPECT_EQ(c.N, 32);
  EXPECT_DOUBLE_EQ(c.sigma, 0.15);
  EXPECT_EQ(c.cells, (std::vector<int>{-1, 0, 2}));
  EXPECT_EQ(c.ref_N, 128);
  EXPECT_DOUBLE_EQ(c.ref_h, 0.01);
  EXPECT_EQ(c.epsilons.size(), 3u);
  ASSERT_TRUE(c.bc.has_value());
  EXPECT_EQ(*c.bc, BoundaryCondition::dirichlet);
  EXPECT_NO_THROW(c.Validate());
}

TEST(RunConfig, RejectsUnknownKeysAndValues)
{
  EXPECT_EQ(CodeOf([] { ApplyConfigFile(RunConfig{}, {{"colour", "red"}}); }), ErrorCode::config);
  EXPECT_EQ(CodeOf([] { ApplyConfigFile(RunConfig{}, {{"h", "small"}}); }), ErrorCode::config);
  EXPECT_EQ(CodeOf([] { ApplyConfigFile(RunConfig{}, {{"method", "fdtd"}}); }), ErrorCode::config);
  EXPECT_EQ(CodeOf([] { ParseMethod("magic"); }), ErrorCode::config);
  EXPECT_EQ(ParseMethod("decomposition"), Method::decomp);
}

TEST(RunConfig, ProblemFromConfigFile)
{
  const std::string path = TempPath("problem_run.cfg");
  {
    std::ofstream out(path);
    out << "k_squared = 12\nn = sine:3,1,4\nq = constant:0\nf = radial:0,0.5,0.1,0.3,0.5,0\n";
  }
  RunConfig c;
  c.config_file = path;
  c = ApplyConfigFile(c, ReadKeyValueFile(path));
  c.config_file = path;
  const ScatteringProblem p = ProblemOf(c);
  EXPECT_NEAR(p.KSquared(), 12.0, 1e-12);
  EXPECT_NEAR(p.n(0.125, 0.3), 4.0, 1e-12);
  EXPECT_EQ(p.q(0.1, 0.5), 0.0);
  EXPECT_NEAR(p.f(0.0, 0.5), 0.5, 1e-12);
  // A nonzero constant q is not compactly supported.
  {
    std::ofstream out(path);
    out << "k_squared = 12\nq = constant:1\n";
  }
  EXPECT_EQ(CodeOf([&] { ProblemOf(c); }), ErrorCode::support);
}

TEST(ExitCodes, DistinctPerError)
{
  std::set<int> seen;
  for (ErrorCode e :
       {ErrorCode::invalid_argument, ErrorCode::config, ErrorCode::io,
        ErrorCode::dimension_mismatch, ErrorCode::support, ErrorCode::singular_cell_problem,
        ErrorCode::contour_configuration, ErrorCode::assumption3, ErrorCode::sigma_admissibility,
        ErrorCode::eigensolver, ErrorCode::standing_wave, ErrorCode::classification,
        ErrorCode::trapped_mode, ErrorCode::division_degeneracy, ErrorCode::enlarge_R,
        ErrorCode::no_convergence, ErrorCode::missing_artifact})
  {
    const int code = ExitCodeOf(e);
    EXPECT_GT(code, 1);
    EXPECT_LT(code, 126);
    EXPECT_TRUE(seen.insert(code).second);
    EXPECT_NE(std::string(ErrorName(e)), "");
  }
}

TEST(Studies, SlopeMatchesHandLeastSquares)
{
  ConvergenceTable t;
  t.params = {0.04, 0.02, 0.01};
  t.errors = {5.96e-2, 1.60e-2, 3.35e-3};
  t.slope = LogLogSlope(t.params, t.errors);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < 3; i++)
  {
    const double x = std::log(t.params[i]), y = std::log(t.errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double hand = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
  EXPECT_NEAR(t.slope, hand, 1e-12);
  EXPECT_NEAR(t.slope, 2.08, 0.01);
  const auto r = t.Ratios();
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0], 5.96e-2 / 1.60e-2, 1e-12);
  // Written CSV round trips through the plot reader.
  const std::string csv = TempPath("conv.csv");
  WriteConvergenceCsv(csv, t);
  EXPECT_EQ(Slurp(csv).substr(0, 14), "param,rel_err\n");
  EXPECT_NO_THROW(EmitPlot("convergence", csv, TempPath("conv.svg")));
  EXPECT_NE(Slurp(TempPath("conv.svg")).find("<svg"), std::string::npos);
}

TEST(Studies, RelativeDifferenceAcrossMeshes)
{
  const auto [coarse, b1] = BuildCellMesh(0.1, BoundaryCondition::neumann);
  const auto [fine, b2] = BuildCellMesh(0.05, BoundaryCondition::neumann);
  auto linear = [](const CellMesh &m)
  {
    FieldOnCell f;
    f.values.resize(m.NumVertices());
    for (int v = 0; v < m.NumVertices(); v++)
    {
      f.values[v] = cplx(1.0 + m.vertices[v].x1, m.vertices[v].x2);
    }
    return f;
  };
  EXPECT_LT(RelativeDifference(linear(coarse), coarse, linear(fine), fine), 1e-12);
}

TEST(Plot, MissingArtifactAndUnknownKind)
{
  EXPECT_EQ(CodeOf([] { EmitPlot("field", "/nonexistent/field.csv", TempPath("x.svg")); }),
            ErrorCode::missing_artifact);
  const std::string csv = TempPath("c.csv");
  WriteTextFile(csv, "param,rel_err\n1,0.1\n");
  EXPECT_EQ(CodeOf([] { EmitPlot("histogram", TempPath("c.csv"), TempPath("x.svg")); }),
            ErrorCode::config);
  EXPECT_EQ(CodeOf([] { EmitPlot("field", TempPath("c.csv"), TempPath("x.svg")); }),
            ErrorCode::missing_artifact);
}

TEST(Plot, ContourPassesBelowTheRightgoingValue)
{
  const double delta = 0.3;
  const ContourParam c = BuildCciContour({0.9577}, {-0.9577}, delta);
  const std::string csv = TempPath("contour.csv");
  WriteContourCsv(c, 2000, csv);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,re_s,im_s,re_ds,im_ds");
  double best = 1e300;
  while (std::getline(in, line))
  {
    double t, re, im;
    char comma;
    std::istringstream ss(line);
    ss >> t >> comma >> re >> comma >> im;
    best = std::min(best, std::hypot(re - 0.9577, im + delta));
  }
  EXPECT_LT(best, 1e-3);
  EXPECT_NO_THROW(EmitPlot("contour", csv, TempPath("contour.svg")));
}

TEST(Harness, RunsAreBitwiseReproducible)
{
  RunConfig cfg;
  cfg.h = 0.1;
  cfg.N = 16;
  cfg.cells = {-1, 0, 1};
  std::vector<std::string> files;
  for (int rep = 0; rep < 2; rep++)
  {
    Workspace ws(ProblemOf(cfg));
    for (Method m : {Method::cci, Method::decomp})
    {
      const MethodRun run = RunMethod(ws, cfg, m, cfg.h, cfg.N);
      const std::string path = TempPath("det_" + std::to_string(rep) + ToString(m) + ".csv");
      WriteFieldCsv(path, run.disc->mesh, run.fields);
      files.push_back(Slurp(path));
    }
  }
  EXPECT_EQ(files[0], files[2]);
  EXPECT_EQ(files[1], files[3]);
  EXPECT_EQ(files[0].substr(0, 27), "cell_index,x1,x2,re_u,im_u\n");
  EXPECT_NO_THROW(EmitPlot("field", TempPath("det_0cci.csv"), TempPath("det.svg")));
}

TEST(Harness, DispersionCsvLayout)
{
  const ScatteringProblem p = ExampleProblem(ExampleId::example1);
  const Discretization d = Discretize(p.n, 0.1, p.bc);
  const DispersionDiagram dd = DispersionBranches(d.P, {-1.0, 0.0, 1.0}, 3);
  const std::string csv = TempPath("dispersion.csv");
  WriteDispersionCsv(csv, dd);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "alpha,branch_0,branch_1,branch_2");
  EXPECT_NO_THROW(EmitPlot("dispersion", csv, TempPath("dispersion.svg")));
}

}  // namespace
}  // namespace lapwave
