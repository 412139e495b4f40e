// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef LAPWAVE_PROBLEM_HPP
#define LAPWAVE_PROBLEM_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include "lapwave/types.hpp"

namespace lapwave
{

struct CellMesh;
struct FieldOnCell;

struct Box
{
  double x1_min, x1_max, x2_min, x2_max;
  bool Contains(double x1, double x2) const
  {
    return x1 >= x1_min && x1 <= x1_max && x2 >= x2_min && x2 <= x2_max;
  }
};

// Real scalar coefficient on the strip. Compactly supported fields carry a support box
// that lets assembly skip elements and lets loads check which cell they live in.
struct CoefficientField
{
  std::function<double(double, double)> evaluator;
  bool periodic_in_x1 = false;
  std::optional<Box> support_box;

  double operator()(double x1, double x2) const { return evaluator(x1, x2); }
  bool IsZero() const;
};

CoefficientField ConstantField(double value);
CoefficientField ZeroField();

// Radial profile around a center: plateau inside r_inner, ambient outside r_outer and a
// C4 zeta-transition in between. Not periodic, support box spans r_outer when ambient == 0.
CoefficientField RadialField(double c1, double c2, double r_inner, double r_outer,
                             double plateau, double ambient);

// Periodic copy of a field defined on the reference cell: evaluates g at x1 wrapped into
// [-1/2, 1/2).
CoefficientField PeriodizedField(CoefficientField cell_field);

// zeta(t; a, b): 1 for t <= a, 0 for t >= b, normalized quartic-bump integral in between.
double CutoffZeta(double t, double a, double b);

struct RampValue
{
  double value, d1, d2;
};

// zeta and its first two derivatives in t.
RampValue CutoffZetaDerivs(double t, double a, double b);

// psi^+(x1) = 1 - zeta(x1; 1/2, 3/2), psi^-(x1) = psi^+(-x1); derivatives in x1.
RampValue RampPsi(double x1, int sign);

struct ScatteringProblem
{
  double k = 1.0;
  CoefficientField n;
  CoefficientField q;
  CoefficientField f;
  BoundaryCondition bc = BoundaryCondition::neumann;
  std::string name;

  double KSquared() const { return k * k; }
};

enum class ExampleId
{
  example1,
  example2,
  remark2
};

ExampleId ParseExampleId(const std::string &s);
const char *ToString(ExampleId id);

ScatteringProblem ExampleProblem(ExampleId id,
                                 BoundaryCondition bc = BoundaryCondition::neumann);

// Checks positivity of n and n + q on a sample grid and that supp q, supp f lie in the
// closed reference cell. Throws on violation.
void ValidateProblem(const ScatteringProblem &prob, int samples = 200);

// q = -f / (k^2 u) evaluated pointwise with u the piecewise-linear interpolant of the
// given nodal field on the reference cell; zero outside supp f.
CoefficientField ConstructTrappedModePerturbation(const FieldOnCell &u, const CellMesh &mesh,
                                                  const CoefficientField &f, double k);

// Flat key = value file, '#' starts a comment.
using KeyValueMap = std::map<std::string, std::string>;
KeyValueMap ReadKeyValueFile(const std::string &path);

// Keys: example, k_squared, bc, n, q, f. Field specs: "constant:v",
// "radial:c1,c2,r_inner,r_outer,plateau,ambient", "sine:a,b,freq" (a + b sin(freq pi x1)).
ScatteringProblem ProblemFromKeyValues(const KeyValueMap &kv);
ScatteringProblem LoadProblemConfig(const std::string &path);
CoefficientField ParseFieldSpec(const std::string &spec, bool periodic);

}  // namespace lapwave

#endif  // LAPWAVE_PROBLEM_HPP
