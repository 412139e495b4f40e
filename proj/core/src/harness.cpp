// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lapwave/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <json.hpp>

namespace lapwave
{

using json = nlohmann::ordered_json;

Method ParseMethod(const std::string &s)
{
  if (s == "cci")
  {
    return Method::cci;
  }
  if (s == "decomp" || s == "decomposition")
  {
    return Method::decomp;
  }
  if (s == "oracle")
  {
    return Method::oracle;
  }
  throw Error(ErrorCode::config, "unknown method '" + s + "' (use cci, decomp or oracle)");
}

const char *ToString(Method m)
{
  switch (m)
  {
    case Method::cci:
      return "cci";
    case Method::decomp:
      return "decomp";
    case Method::oracle:
      return "oracle";
  }
  return "unknown";
}

void RunConfig::Validate() const
{
  if (!(h > 0.0 && h < 0.5))
  {
    throw Error(ErrorCode::config, "h must lie in (0, 0.5), got " + std::to_string(h));
  }
  if (N < 4 || N % 2 != 0)
  {
    throw Error(ErrorCode::config, "N must be even and at least 4, got " + std::to_string(N));
  }
  if (ref_N < 4 || ref_N % 2 != 0)
  {
    throw Error(ErrorCode::config, "ref-N must be even and at least 4");
  }
  if (!(ref_h > 0.0 && ref_h < 0.5))
  {
    throw Error(ErrorCode::config, "ref-h must lie in (0, 0.5)");
  }
  if (method == Method::decomp && !(sigma > 0.0))
  {
    throw Error(ErrorCode::config, "the decomposition method needs sigma > 0");
  }
  if (delta && !(*delta > 0.0))
  {
    throw Error(ErrorCode::config, "delta must be positive");
  }
  if (cells.empty())
  {
    throw Error(ErrorCode::config, "at least one cell must be exported");
  }
  if (epsilons.size() < 3)
  {
    throw Error(ErrorCode::config, "the oracle needs at least three damping values");
  }
}

namespace
{

double ParseDouble(const std::string &key, const std::string &v)
{
  try
  {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size())
    {
      throw std::invalid_argument(v);
    }
    return d;
  }
  catch (const std::exception &)
  {
    throw Error(ErrorCode::config, "key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::vector<std::string> SplitList(const std::string &v)
{
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty())
    {
      out.push_back(item);
    }
  }
  return out;
}

}  // namespace

RunConfig ApplyConfigFile(RunConfig cfg, const KeyValueMap &kv)
{
  for (const auto &[key, v] : kv)
  {
    if (key == "example")
    {
      cfg.example = v;
    }
    else if (key == "bc")
    {
      cfg.bc = ParseBoundaryCondition(v);
    }
    else if (key == "method")
    {
      cfg.method = ParseMethod(v);
    }
    else if (key == "h")
    {
      cfg.h = ParseDouble(key, v);
    }
    else if (key == "N")
    {
      cfg.N = static_cast<int>(ParseDouble(key, v));
    }
    else if (key == "delta")
    {
      cfg.delta = ParseDouble(key, v);
    }
    else if (key == "sigma")
    {
      cfg.sigma = ParseDouble(key, v);
    }
    else if (key == "cells")
    {
      cfg.cells.clear();
      for (const auto &c : SplitList(v))
      {
        cfg.cells.push_back(static_cast<int>(ParseDouble(key, c)));
      }
    }
    else if (key == "out")
    {
      cfg.out_dir = v;
    }
    else if (key == "ref-N" || key == "ref_N")
    {
      cfg.ref_N = static_cast<int>(ParseDouble(key, v));
    }
    else if (key == "ref-h" || key == "ref_h")
    {
      cfg.ref_h = ParseDouble(key, v);
    }
    else if (key == "epsilons")
    {
      cfg.epsilons.clear();
      for (const auto &c : SplitList(v))
      {
        cfg.epsilons.push_back(ParseDouble(key, c));
      }
    }
    else if (key == "threads")
    {
      cfg.threads = static_cast<int>(ParseDouble(key, v));
    }
    else if (key == "k_squared" || key == "n" || key == "q" || key == "f")
    {
      // Problem keys, read by ProblemOf.
    }
    else
    {
      throw Error(ErrorCode::config, "unknown configuration key '" + key + "'");
    }
  }
  return cfg;
}

namespace
{

// q built from the unperturbed solution so that k^2 is an eigenvalue of the perturbed
// operator.
ScatteringProblem TrappedModeProblem(const RunConfig &cfg, BoundaryCondition bc)
{
  ScatteringProblem prob = ExampleProblem(ExampleId::remark2, bc);
  const Discretization d = Discretize(prob.n, cfg.h, bc);
  CciOptions opts;
  opts.N = cfg.N;
  opts.coupled.threads = cfg.threads;
  const CciSolution sol = CciSolve(prob, d, opts);
  prob.q = ConstructTrappedModePerturbation(sol.fields[0], d.mesh, prob.f, prob.k);
  prob.name = "remark2-trapped";
  return prob;
}

}  // namespace

ScatteringProblem ProblemOf(const RunConfig &cfg)
{
  ScatteringProblem prob;
  if (!cfg.config_file.empty())
  {
    KeyValueMap kv = ReadKeyValueFile(cfg.config_file);
    if (cfg.bc)
    {
      kv["bc"] = ToString(*cfg.bc);
    }
    if (kv.count("example") && (kv["example"] == "remark2" || kv["example"] == "trapped"))
    {
      RunConfig c = cfg;
      c.example = "remark2";
      c.config_file.clear();
      return ProblemOf(c);
    }
    prob = ProblemFromKeyValues(kv);
  }
  else
  {
    const BoundaryCondition bc = cfg.bc.value_or(BoundaryCondition::neumann);
    if (cfg.example == "remark2" || cfg.example == "trapped")
    {
      prob = TrappedModeProblem(cfg, bc);
    }
    else if (cfg.example == "remark2-free")
    {
      prob = ExampleProblem(ExampleId::remark2, bc);
    }
    else
    {
      prob = ExampleProblem(ParseExampleId(cfg.example), bc);
    }
  }
  ValidateProblem(prob);
  return prob;
}

Workspace::Workspace(ScatteringProblem prob, double sigma_band)
  : prob_(std::move(prob)), band_(sigma_band)
{
}

const Discretization &Workspace::Disc(double h)
{
  auto &slot = disc_[h];
  if (!slot)
  {
    slot = std::make_unique<Discretization>(Discretize(prob_.n, h, prob_.bc));
  }
  return *slot;
}

const SpectralAnalysis &Workspace::Spectral(double h)
{
  auto &slot = spec_[h];
  if (!slot)
  {
    QepOptions qep;
    qep.band = band_;
    slot = std::make_unique<SpectralAnalysis>(AnalyzeSpectrum(Disc(h).P, prob_.k, qep));
  }
  return *slot;
}

namespace
{

json CoupledJson(const CoupledStats &s)
{
  return json{{"coupling_vertices", s.coupling_size},
              {"unique_factorizations", s.unique_factorizations},
              {"sweeps", s.sweeps},
              {"schur_path", s.schur_path},
              {"gmres_iterations", s.gmres_iterations},
              {"gmres_relative_residual", s.gmres_residual},
              {"schur_rcond_estimate", s.schur_rcond},
              {"max_cell_residual", s.max_cell_residual},
              {"seconds", s.seconds}};
}

json ComplexJson(cplx z)
{
  return json::array({z.real(), z.imag()});
}

const FieldOnCell &CellZero(const std::vector<FieldOnCell> &fields)
{
  for (const auto &f : fields)
  {
    if (f.cell_index == 0)
    {
      return f;
    }
  }
  throw Error(ErrorCode::missing_artifact, "run did not produce the field on cell 0");
}

}  // namespace

OracleRun RunOracle(Workspace &ws, const RunConfig &cfg, double h)
{
  OracleRun out;
  out.disc = &ws.Disc(h);
  std::vector<double> eps = cfg.epsilons;
  std::sort(eps.begin(), eps.end(), std::greater<double>());
  OracleOptions oo;
  int keep = 0;
  for (int c : cfg.cells)
  {
    keep = std::max(keep, std::abs(c));
  }
  oo.keep_cells = keep;
  for (double e : eps)
  {
    out.runs.push_back(DampedTruncatedSolve(ws.Problem(), out.disc->mesh, e, oo));
  }
  const SpMat Mv = AssembleVertexMass(out.disc->mesh);
  out.extrapolation = LapExtrapolate(out.runs, Mv, 0);
  json rep;
  rep["method"] = "oracle";
  rep["problem"] = ws.Problem().name;
  rep["h"] = h;
  json runs = json::array();
  for (const auto &r : out.runs)
  {
    runs.push_back(json{{"epsilon", r.epsilon}, {"R", r.R}, {"decay_indicator", r.decay_indicator}});
  }
  rep["runs"] = runs;
  rep["successive_differences"] = out.extrapolation.successive_diffs;
  rep["extrapolation_error_indicator"] = out.extrapolation.error_indicator;
  out.report_json = rep.dump(2);
  return out;
}

MethodRun RunMethod(Workspace &ws, const RunConfig &cfg, Method method, double h, int N)
{
  MethodRun run;
  run.method = method;
  run.h = h;
  run.N = N;
  const Discretization &d = ws.Disc(h);
  run.disc = &d;
  std::vector<int> cells = cfg.cells;
  if (std::find(cells.begin(), cells.end(), 0) == cells.end())
  {
    cells.insert(cells.begin(), 0);
  }
  json rep;
  rep["method"] = ToString(method);
  rep["problem"] = ws.Problem().name;
  rep["k_squared"] = ws.Problem().KSquared();
  rep["bc"] = ToString(ws.Problem().bc);
  if (method == Method::cci)
  {
    CciOptions opts;
    opts.N = N;
    opts.delta = cfg.delta;
    opts.coupled.cells = cells;
    opts.coupled.threads = cfg.threads;
    opts.coupled.verbose = cfg.verbose;
    CciSolution sol = CciSolve(ws.Problem(), d, opts, &ws.Spectral(h));
    run.fields = std::move(sol.fields);
    const auto &r = sol.report;
    rep["sizes"] = json{{"m_prime", r.m_prime}, {"N", r.N}, {"h", r.h}};
    rep["contour"] = json{{"delta", r.delta},
                          {"S_plus", r.S_plus},
                          {"S_minus", r.S_minus},
                          {"min_node_distance", r.min_node_distance}};
    rep["coupled"] = CoupledJson(r.coupled);
    rep["timings"] = json{{"spectral_seconds", r.seconds_spectral}, {"solve_seconds", r.seconds_total}};
  }
  else if (method == Method::decomp)
  {
    DecompOptions opts;
    opts.N = N;
    opts.sigma = cfg.sigma;
    opts.coupled.cells = cells;
    opts.coupled.threads = cfg.threads;
    opts.coupled.verbose = cfg.verbose;
    DecompSolution sol = DecompSolve(ws.Problem(), d, opts, &ws.Spectral(h));
    run.fields = std::move(sol.field);
    const auto &r = sol.report;
    rep["sizes"] = json{{"m_prime", r.m_prime}, {"N", r.N}, {"h", r.h}, {"modes", r.num_modes}};
    rep["line"] = json{{"sigma", r.sigma}, {"spectral_margin", r.sigma_margin}};
    rep["calibrated_sign"] = r.calibrated_sign;
    json modes = json::array();
    for (std::size_t m = 0; m < sol.modes.size(); m++)
    {
      modes.push_back(json{{"beta_hat", sol.modes[m].beta_hat},
                           {"lambda", sol.modes[m].lambda},
                           {"flux_pairing", ComplexJson(r.flux_pairings[m])},
                           {"coupling_C", ComplexJson(sol.coeffs_C[m])},
                           {"amplitude", ComplexJson(sol.amplitudes[m])}});
    }
    rep["modes"] = modes;
    rep["coupled"] = CoupledJson(r.coupled);
    rep["timings"] = json{{"spectral_seconds", r.seconds_spectral}, {"solve_seconds", r.seconds_total}};
  }
  else
  {
    RunConfig c = cfg;
    c.cells = cells;
    OracleRun orc = RunOracle(ws, c, h);
    run.fields.push_back(orc.extrapolation.field);
    rep = json::parse(orc.report_json);
  }
  const SpMat Mv = AssembleVertexMass(d.mesh);
  json norms = json::object();
  for (const auto &f : run.fields)
  {
    norms[std::to_string(f.cell_index)] = L2Norm(Mv, f.values);
  }
  rep["cell_l2_norms"] = norms;
  run.report_json = rep.dump(2);
  return run;
}

std::vector<double> ConvergenceTable::Ratios() const
{
  std::vector<double> r;
  for (std::size_t i = 0; i + 1 < errors.size(); i++)
  {
    r.push_back(errors[i + 1] > 0.0 ? errors[i] / errors[i + 1] : 0.0);
  }
  return r;
}

double RelativeDifference(const FieldOnCell &a, const CellMesh &mesh_a, const FieldOnCell &b,
                          const CellMesh &mesh_b)
{
  const SpMat Mv = AssembleVertexMass(mesh_b);
  if (&mesh_a == &mesh_b || (mesh_a.NumVertices() == mesh_b.NumVertices() && mesh_a.h == mesh_b.h))
  {
    return RelativeL2Difference(Mv, a.values, b.values);
  }
  const PointLocator loc(mesh_a);
  Vec ai(mesh_b.NumVertices());
  for (int v = 0; v < mesh_b.NumVertices(); v++)
  {
    ai[v] = InterpolateVertexField(mesh_a, loc, a.values, mesh_b.vertices[v].x1,
                                   mesh_b.vertices[v].x2);
  }
  return RelativeL2Difference(Mv, ai, b.values);
}

ConvergenceTable ConvergeN(Workspace &ws, const RunConfig &cfg, const std::vector<int> &Ns)
{
  ConvergenceTable t;
  t.axis = "N";
  t.fixed = cfg.h;
  t.reference = std::string(ToString(cfg.method)) + " N=" + std::to_string(cfg.ref_N) +
                " h=" + std::to_string(cfg.h);
  RunConfig c = cfg;
  c.cells = {0};
  const MethodRun ref = RunMethod(ws, c, cfg.method, cfg.h, cfg.ref_N);
  std::vector<int> sorted = Ns;
  std::sort(sorted.begin(), sorted.end());
  for (int N : sorted)
  {
    const MethodRun run = RunMethod(ws, c, cfg.method, cfg.h, N);
    t.params.push_back(N);
    t.errors.push_back(RelativeDifference(CellZero(run.fields), run.disc->mesh,
                                          CellZero(ref.fields), ref.disc->mesh));
  }
  t.slope = t.params.size() >= 2 ? LogLogSlope(t.params, t.errors) : 0.0;
  return t;
}

ConvergenceTable ConvergeH(Workspace &ws, const RunConfig &cfg, const std::vector<double> &hs)
{
  ConvergenceTable t;
  t.axis = "h";
  t.fixed = cfg.N;
  t.reference = std::string(ToString(cfg.method)) + " N=" + std::to_string(cfg.N) +
                " h=" + std::to_string(cfg.ref_h);
  RunConfig c = cfg;
  c.cells = {0};
  const MethodRun ref = RunMethod(ws, c, cfg.method, cfg.ref_h, cfg.N);
  std::vector<double> sorted = hs;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  for (double h : sorted)
  {
    const MethodRun run = RunMethod(ws, c, cfg.method, h, cfg.N);
    t.params.push_back(h);
    t.errors.push_back(RelativeDifference(CellZero(run.fields), run.disc->mesh,
                                          CellZero(ref.fields), ref.disc->mesh));
  }
  t.slope = t.params.size() >= 2 ? LogLogSlope(t.params, t.errors) : 0.0;
  return t;
}

ConvergenceTable CompareMethods(Workspace &ws, const RunConfig &cfg,
                                const std::vector<double> &hs)
{
  ConvergenceTable t;
  t.axis = "h";
  t.fixed = cfg.N;
  t.reference = "cci vs decomp, N=" + std::to_string(cfg.N);
  RunConfig c = cfg;
  c.cells = {0};
  std::vector<double> sorted = hs;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  for (double h : sorted)
  {
    const MethodRun a = RunMethod(ws, c, Method::cci, h, cfg.N);
    const MethodRun b = RunMethod(ws, c, Method::decomp, h, cfg.N);
    t.params.push_back(h);
    t.errors.push_back(RelativeDifference(CellZero(b.fields), b.disc->mesh, CellZero(a.fields),
                                          a.disc->mesh));
  }
  t.slope = t.params.size() >= 2 ? LogLogSlope(t.params, t.errors) : 0.0;
  return t;
}

namespace
{

std::ofstream OpenOut(const std::string &path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw Error(ErrorCode::io, "cannot write " + path);
  }
  out.precision(16);
  return out;
}

}  // namespace

void WriteFieldCsv(const std::string &path, const CellMesh &mesh,
                   const std::vector<FieldOnCell> &fields)
{
  std::ofstream out = OpenOut(path);
  out << "cell_index,x1,x2,re_u,im_u\n";
  for (const auto &f : fields)
  {
    for (int v = 0; v < mesh.NumVertices(); v++)
    {
      out << f.cell_index << "," << mesh.vertices[v].x1 + f.cell_index << ","
          << mesh.vertices[v].x2 << "," << f.values[v].real() << "," << f.values[v].imag()
          << "\n";
    }
  }
}

void WriteConvergenceCsv(const std::string &path, const ConvergenceTable &t)
{
  std::ofstream out = OpenOut(path);
  out << "param,rel_err\n";
  for (std::size_t i = 0; i < t.params.size(); i++)
  {
    out << t.params[i] << "," << t.errors[i] << "\n";
  }
}

std::string ConvergenceJson(const ConvergenceTable &t)
{
  json j;
  j["axis"] = t.axis;
  j["fixed"] = t.fixed;
  j["reference"] = t.reference;
  j["params"] = t.params;
  j["rel_err"] = t.errors;
  j["ratios"] = t.Ratios();
  j["slope"] = t.slope;
  return j.dump(2);
}

void WriteDispersionCsv(const std::string &path, const DispersionDiagram &d)
{
  std::ofstream out = OpenOut(path);
  out << "alpha";
  const std::size_t m = d.branches.empty() ? 0 : d.branches[0].size();
  for (std::size_t j = 0; j < m; j++)
  {
    out << ",branch_" << j;
  }
  out << "\n";
  for (std::size_t i = 0; i < d.alphas.size(); i++)
  {
    out << d.alphas[i];
    for (std::size_t j = 0; j < m; j++)
    {
      out << "," << d.branches[i][j];
    }
    out << "\n";
  }
}

void WriteTextFile(const std::string &path, const std::string &text)
{
  std::ofstream out = OpenOut(path);
  out << text;
  if (!text.empty() && text.back() != '\n')
  {
    out << "\n";
  }
}

int ExitCodeOf(ErrorCode code)
{
  return static_cast<int>(code);
}

}  // namespace lapwave
