// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lapwave/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include "lapwave/fem.hpp"
#include "lapwave/mesh.hpp"
#include "ramp.hpp"

namespace lapwave
{

namespace
{

std::string Trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
  {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<double> ParseNumbers(const std::string &s, const std::string &what)
{
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    try
    {
      out.push_back(std::stod(Trim(item)));
    }
    catch (const std::exception &)
    {
      throw Error(ErrorCode::config, "cannot parse number '" + item + "' in " + what);
    }
  }
  return out;
}

}  // namespace

const char *ErrorName(ErrorCode code)
{
  switch (code)
  {
    case ErrorCode::invalid_argument:
      return "invalid argument";
    case ErrorCode::config:
      return "configuration error";
    case ErrorCode::io:
      return "i/o error";
    case ErrorCode::dimension_mismatch:
      return "dimension mismatch";
    case ErrorCode::support:
      return "support error";
    case ErrorCode::singular_cell_problem:
      return "singular cell problem";
    case ErrorCode::contour_configuration:
      return "contour configuration error";
    case ErrorCode::assumption3:
      return "S+ and S- intersect";
    case ErrorCode::sigma_admissibility:
      return "shift sigma not admissible";
    case ErrorCode::eigensolver:
      return "eigensolver failure";
    case ErrorCode::standing_wave:
      return "standing wave";
    case ErrorCode::classification:
      return "classification inconsistency";
    case ErrorCode::trapped_mode:
      return "trapped mode";
    case ErrorCode::division_degeneracy:
      return "division degeneracy";
    case ErrorCode::enlarge_R:
      return "truncation too short, enlarge R";
    case ErrorCode::no_convergence:
      return "no convergence";
    case ErrorCode::missing_artifact:
      return "missing artifact";
  }
  return "error";
}

const char *ToString(BoundaryCondition bc)
{
  return bc == BoundaryCondition::neumann ? "neumann" : "dirichlet";
}

BoundaryCondition ParseBoundaryCondition(const std::string &s)
{
  if (s == "neumann")
  {
    return BoundaryCondition::neumann;
  }
  if (s == "dirichlet")
  {
    return BoundaryCondition::dirichlet;
  }
  throw Error(ErrorCode::config, "boundary condition must be 'neumann' or 'dirichlet', got '" +
                                     s + "'");
}

bool CoefficientField::IsZero() const
{
  if (support_box)
  {
    const Box &b = *support_box;
    return b.x1_max < b.x1_min || b.x2_max < b.x2_min;
  }
  return false;
}

CoefficientField ConstantField(double value)
{
  CoefficientField f;
  f.evaluator = [value](double, double) { return value; };
  f.periodic_in_x1 = true;
  if (value == 0.0)
  {
    f.support_box = Box{1.0, -1.0, 1.0, -1.0};
  }
  return f;
}

CoefficientField ZeroField()
{
  return ConstantField(0.0);
}

CoefficientField RadialField(double c1, double c2, double r_inner, double r_outer,
                             double plateau, double ambient)
{
  if (!(r_inner < r_outer))
  {
    throw Error(ErrorCode::invalid_argument, "radial field needs r_inner < r_outer");
  }
  CoefficientField f;
  f.evaluator = [=](double x1, double x2)
  {
    const double r = std::hypot(x1 - c1, x2 - c2);
    return ambient + (plateau - ambient) * CutoffZeta(r, r_inner, r_outer);
  };
  if (ambient == 0.0)
  {
    f.support_box = Box{c1 - r_outer, c1 + r_outer, c2 - r_outer, c2 + r_outer};
  }
  return f;
}

CoefficientField PeriodizedField(CoefficientField cell_field)
{
  CoefficientField f;
  auto g = cell_field.evaluator;
  f.evaluator = [g](double x1, double x2)
  {
    const double y = x1 - std::floor(x1 + 0.5);
    return g(y, x2);
  };
  f.periodic_in_x1 = true;
  return f;
}

double CutoffZeta(double t, double a, double b)
{
  return CutoffZetaDerivs(t, a, b).value;
}

RampValue CutoffZetaDerivs(double t, double a, double b)
{
  if (!(a < b))
  {
    throw Error(ErrorCode::invalid_argument, "cutoff interval needs a < b");
  }
  const double L = b - a;
  const auto w = detail::BetaRamp(4, (t - a) / L);
  return {1.0 - w[0], -w[1] / L, -w[2] / (L * L)};
}

RampValue RampPsi(double x1, int sign)
{
  if (sign >= 0)
  {
    const RampValue z = CutoffZetaDerivs(x1, 0.5, 1.5);
    return {1.0 - z.value, -z.d1, -z.d2};
  }
  // psi^-(x) = psi^+(-x): the first derivative flips sign.
  const RampValue p = RampPsi(-x1, +1);
  return {p.value, -p.d1, p.d2};
}

ExampleId ParseExampleId(const std::string &s)
{
  if (s == "1" || s == "example1")
  {
    return ExampleId::example1;
  }
  if (s == "2" || s == "example2")
  {
    return ExampleId::example2;
  }
  if (s == "remark2" || s == "3" || s == "trapped")
  {
    return ExampleId::remark2;
  }
  throw Error(ErrorCode::config, "unknown example '" + s + "' (use 1, 2 or remark2)");
}

const char *ToString(ExampleId id)
{
  switch (id)
  {
    case ExampleId::example1:
      return "example1";
    case ExampleId::example2:
      return "example2";
    case ExampleId::remark2:
      return "remark2";
  }
  return "unknown";
}

ScatteringProblem ExampleProblem(ExampleId id, BoundaryCondition bc)
{
  ScatteringProblem p;
  p.bc = bc;
  p.name = ToString(id);
  const CoefficientField n1 = PeriodizedField(RadialField(0.0, 0.5, 0.1, 0.3, 9.0, 1.0));
  p.f = RadialField(0.0, 0.5, 0.1, 0.3, 0.5, 0.0);
  p.q = RadialField(0.2, 0.2, 0.1, 0.15, 2.0, 0.0);
  switch (id)
  {
    case ExampleId::example1:
      p.n = n1;
      p.k = std::sqrt(17.0);
      break;
    case ExampleId::example2:
      p.n.evaluator = [](double x1, double) { return 3.0 + std::sin(4.0 * pi * x1); };
      p.n.periodic_in_x1 = true;
      p.k = std::sqrt(12.0);
      break;
    case ExampleId::remark2:
      p.n = n1;
      p.q = ZeroField();
      p.k = std::sqrt(3.2);
      break;
  }
  return p;
}

void ValidateProblem(const ScatteringProblem &prob, int samples)
{
  if (!(prob.k > 0.0))
  {
    throw Error(ErrorCode::invalid_argument, "wavenumber must be positive");
  }
  if (!prob.n.periodic_in_x1)
  {
    throw Error(ErrorCode::invalid_argument, "n must be periodic in x1");
  }
  for (const auto *field : {&prob.q, &prob.f})
  {
    if (field->support_box && !field->IsZero())
    {
      const Box &b = *field->support_box;
      if (b.x1_min < -0.5 - 1e-12 || b.x1_max > 0.5 + 1e-12 || b.x2_min < -1e-12 ||
          b.x2_max > 1.0 + 1e-12)
      {
        throw Error(ErrorCode::support, "supports of q and f must lie in the reference cell");
      }
    }
    else if (!field->support_box)
    {
      throw Error(ErrorCode::support, "q and f must be compactly supported");
    }
  }
  for (int j = 0; j <= samples; j++)
  {
    for (int i = 0; i <= samples; i++)
    {
      const double x1 = -0.5 + static_cast<double>(i) / samples;
      const double x2 = static_cast<double>(j) / samples;
      const double n = prob.n(x1, x2);
      if (!(n > 0.0) || !(n + prob.q(x1, x2) > 0.0))
      {
        throw Error(ErrorCode::invalid_argument, "n and n + q must be positive on the cell");
      }
    }
  }
}

CoefficientField ConstructTrappedModePerturbation(const FieldOnCell &u, const CellMesh &mesh,
                                                  const CoefficientField &f, double k)
{
  if (u.values.size() != mesh.NumVertices())
  {
    throw Error(ErrorCode::dimension_mismatch, "field does not match the mesh");
  }
  if (f.IsZero())
  {
    return ZeroField();
  }
  if (!f.support_box)
  {
    throw Error(ErrorCode::support, "f must be compactly supported");
  }
  double umax = 0.0, umin = 1e300;
  for (int v = 0; v < mesh.NumVertices(); v++)
  {
    umax = std::max(umax, std::abs(u.values[v]));
    const Point &p = mesh.vertices[v];
    if (f.support_box->Contains(p.x1, p.x2) && f(p.x1, p.x2) != 0.0)
    {
      umin = std::min(umin, std::abs(u.values[v]));
    }
  }
  if (!(umin > 1e-8 * umax))
  {
    throw Error(ErrorCode::division_degeneracy, "u vanishes on the support of f");
  }
  auto values = std::make_shared<Vec>(u.values);
  auto mesh_copy = std::make_shared<CellMesh>(mesh);
  auto loc = std::make_shared<PointLocator>(*mesh_copy);
  const double k2 = k * k;
  CoefficientField q;
  q.support_box = f.support_box;
  q.evaluator = [f, k2, values, mesh_copy, loc](double x1, double x2)
  {
    const double fv = f(x1, x2);
    if (fv == 0.0)
    {
      return 0.0;
    }
    const cplx uv = InterpolateVertexField(*mesh_copy, *loc, *values, x1, x2);
    return std::real(-fv / (k2 * uv));
  };
  return q;
}

KeyValueMap ReadKeyValueFile(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw Error(ErrorCode::io, "cannot open config file " + path);
  }
  KeyValueMap kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line))
  {
    lineno++;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
    {
      line.erase(hash);
    }
    line = Trim(line);
    if (line.empty())
    {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
    {
      throw Error(ErrorCode::config,
                  path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    kv[Trim(line.substr(0, eq))] = Trim(line.substr(eq + 1));
  }
  return kv;
}

CoefficientField ParseFieldSpec(const std::string &spec, bool periodic)
{
  const auto colon = spec.find(':');
  const std::string kind = Trim(spec.substr(0, colon));
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "constant")
  {
    const auto v = ParseNumbers(args, spec);
    if (v.size() != 1)
    {
      throw Error(ErrorCode::config, "constant field takes one value: " + spec);
    }
    return ConstantField(v[0]);
  }
  if (kind == "radial")
  {
    const auto v = ParseNumbers(args, spec);
    if (v.size() != 6)
    {
      throw Error(ErrorCode::config,
                  "radial field takes c1,c2,r_inner,r_outer,plateau,ambient: " + spec);
    }
    CoefficientField f = RadialField(v[0], v[1], v[2], v[3], v[4], v[5]);
    return periodic ? PeriodizedField(f) : f;
  }
  if (kind == "sine")
  {
    const auto v = ParseNumbers(args, spec);
    if (v.size() != 3)
    {
      throw Error(ErrorCode::config, "sine field takes a,b,freq: " + spec);
    }
    CoefficientField f;
    f.evaluator = [a = v[0], b = v[1], w = v[2]](double x1, double)
    { return a + b * std::sin(w * pi * x1); };
    f.periodic_in_x1 = true;
    return f;
  }
  throw Error(ErrorCode::config, "unknown field kind '" + kind + "'");
}

ScatteringProblem ProblemFromKeyValues(const KeyValueMap &kv)
{
  BoundaryCondition bc = BoundaryCondition::neumann;
  if (auto it = kv.find("bc"); it != kv.end())
  {
    bc = ParseBoundaryCondition(it->second);
  }
  ScatteringProblem p;
  if (auto it = kv.find("example"); it != kv.end())
  {
    p = ExampleProblem(ParseExampleId(it->second), bc);
  }
  else
  {
    p.bc = bc;
    p.name = "custom";
    p.n = ConstantField(1.0);
    p.q = ZeroField();
    p.f = ZeroField();
  }
  if (auto it = kv.find("k_squared"); it != kv.end())
  {
    const auto v = ParseNumbers(it->second, "k_squared");
    if (v.size() != 1 || !(v[0] > 0.0))
    {
      throw Error(ErrorCode::config, "k_squared must be a positive number");
    }
    p.k = std::sqrt(v[0]);
  }
  if (auto it = kv.find("n"); it != kv.end())
  {
    p.n = ParseFieldSpec(it->second, true);
  }
  if (auto it = kv.find("q"); it != kv.end())
  {
    p.q = ParseFieldSpec(it->second, false);
  }
  if (auto it = kv.find("f"); it != kv.end())
  {
    p.f = ParseFieldSpec(it->second, false);
  }
  ValidateProblem(p);
  return p;
}

ScatteringProblem LoadProblemConfig(const std::string &path)
{
  return ProblemFromKeyValues(ReadKeyValueFile(path));
}

}  // namespace lapwave
