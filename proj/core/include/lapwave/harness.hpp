// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef LAPWAVE_HARNESS_HPP
#define LAPWAVE_HARNESS_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>
#include "lapwave/cci.hpp"
#include "lapwave/decomposition.hpp"
#include "lapwave/fem.hpp"
#include "lapwave/oracle.hpp"
#include "lapwave/problem.hpp"
#include "lapwave/spectral.hpp"

namespace lapwave
{

enum class Method
{
  cci,
  decomp,
  oracle
};

Method ParseMethod(const std::string &s);
const char *ToString(Method m);

struct RunConfig
{
  std::string example = "1";      // example id, ignored when config_file is set
  std::string config_file;        // key = value problem description
  std::optional<BoundaryCondition> bc;
  Method method = Method::cci;
  double h = 0.02;
  int N = 64;
  std::optional<double> delta;
  double sigma = 0.2;
  std::vector<int> cells{0};
  std::string out_dir = ".";
  int ref_N = 256;
  double ref_h = 0.005;
  std::vector<double> epsilons{4e-2, 2e-2, 1e-2};
  int threads = 0;
  bool verbose = false;

  // Throws a config error with an actionable message.
  void Validate() const;
};

// Reads flags from a key = value file (keys mirror the long flag names) on top of the
// given defaults.
RunConfig ApplyConfigFile(RunConfig base, const KeyValueMap &kv);

ScatteringProblem ProblemOf(const RunConfig &cfg);

// Caches discretizations and spectral analyses per mesh size.
class Workspace
{
public:
  explicit Workspace(ScatteringProblem prob, double sigma_band = 0.4);

  const ScatteringProblem &Problem() const { return prob_; }
  const Discretization &Disc(double h);
  const SpectralAnalysis &Spectral(double h);

private:
  ScatteringProblem prob_;
  double band_;
  std::map<double, std::unique_ptr<Discretization>> disc_;
  std::map<double, std::unique_ptr<SpectralAnalysis>> spec_;
};

struct MethodRun
{
  Method method = Method::cci;
  double h = 0.0;
  int N = 0;
  const Discretization *disc = nullptr;  // owned by the workspace
  std::vector<FieldOnCell> fields;       // full field on the requested cells
  std::string report_json;
};

MethodRun RunMethod(Workspace &ws, const RunConfig &cfg, Method method, double h, int N);

struct ConvergenceTable
{
  std::string axis;  // "h" or "N"
  double fixed = 0.0;
  std::string reference;
  std::vector<double> params;
  std::vector<double> errors;
  double slope = 0.0;  // least squares on log-log

  // err(i) / err(i + 1), defined where both are positive.
  std::vector<double> Ratios() const;
};

// Relative L2(Omega_0) difference of two cell-0 fields; a field on a different mesh is
// interpolated onto the reference mesh first.
double RelativeDifference(const FieldOnCell &a, const CellMesh &mesh_a, const FieldOnCell &b,
                          const CellMesh &mesh_b);

ConvergenceTable ConvergeN(Workspace &ws, const RunConfig &cfg, const std::vector<int> &Ns);
ConvergenceTable ConvergeH(Workspace &ws, const RunConfig &cfg, const std::vector<double> &hs);
// CCI against decomposition at fixed N over a list of h.
ConvergenceTable CompareMethods(Workspace &ws, const RunConfig &cfg,
                                const std::vector<double> &hs);

struct OracleRun
{
  LapExtrapolation extrapolation;
  std::vector<TruncatedRun> runs;
  const Discretization *disc = nullptr;
  std::string report_json;
};

OracleRun RunOracle(Workspace &ws, const RunConfig &cfg, double h);

// Output.
void WriteFieldCsv(const std::string &path, const CellMesh &mesh,
                   const std::vector<FieldOnCell> &fields);
void WriteConvergenceCsv(const std::string &path, const ConvergenceTable &t);
std::string ConvergenceJson(const ConvergenceTable &t);
void WriteDispersionCsv(const std::string &path, const DispersionDiagram &d);
void WriteTextFile(const std::string &path, const std::string &text);

// Plot data rendering. kind in {dispersion, contour, field, convergence}; reads the CSV
// written by the corresponding study and writes a self-contained SVG next to it.
void EmitPlot(const std::string &kind, const std::string &csv_path, const std::string &svg_path);

// Process exit status for an error code (distinct per code).
int ExitCodeOf(ErrorCode code);

}  // namespace lapwave

#endif  // LAPWAVE_HARNESS_HPP
