// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

// Batch front end: dispersion | exceptional | solve | converge | compare | oracle | plot.

#include <filesystem>
#include <iostream>
#include <CLI11.hpp>
#include <json.hpp>
#include "lapwave/harness.hpp"

namespace
{

using namespace lapwave;
using json = nlohmann::ordered_json;

// Raw flag values; merged over the config file after parsing.
struct Flags
{
  std::string example, config, method, bc, out, axis = "N", kind, csv, svg;
  std::vector<double> h, epsilons;
  std::vector<int> N, cells;
  double delta = 0.0, sigma = 0.0, ref_h = 0.0;
  int ref_N = 0, threads = 0, branches = 6, samples = 201;
  bool verbose = false, plot = false;
};

struct Command
{
  CLI::App *app;
  std::map<std::string, CLI::Option *> opts;
  bool Given(const std::string &name) const
  {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

Command AddCommon(CLI::App &root, const std::string &name, const std::string &help, Flags &f)
{
  Command c{root.add_subcommand(name, help), {}};
  auto *a = c.app;
  c.opts["example"] = a->add_option("--example", f.example, "Example id: 1, 2, remark2, remark2-free");
  c.opts["config"] = a->add_option("--config", f.config, "key = value file mirroring the flags")
                       ->check(CLI::ExistingFile);
  c.opts["bc"] = a->add_option("--bc", f.bc, "Boundary condition on x2 = 0, 1: neumann | dirichlet");
  c.opts["h"] = a->add_option("--h", f.h, "Mesh size (comma list for studies)")->delimiter(',');
  c.opts["out"] = a->add_option("--out", f.out, "Output directory");
  c.opts["threads"] = a->add_option("--threads", f.threads, "Worker threads (0: hardware)");
  c.opts["verbose"] = a->add_flag("--verbose,-v", f.verbose, "Progress on stderr");
  return c;
}

void AddSolverFlags(Command &c, Flags &f)
{
  auto *a = c.app;
  c.opts["method"] = a->add_option("--method", f.method, "cci | decomp | oracle");
  c.opts["N"] = a->add_option("--N", f.N, "Quadrature nodes (comma list for studies)")->delimiter(',');
  c.opts["delta"] = a->add_option("--delta", f.delta, "Contour indentation radius");
  c.opts["sigma"] = a->add_option("--sigma", f.sigma, "Shift of the integration line");
  c.opts["cells"] = a->add_option("--cells", f.cells, "Cells to export")->delimiter(',');
  c.opts["ref-N"] = a->add_option("--ref-N", f.ref_N, "Reference N of an N study");
  c.opts["ref-h"] = a->add_option("--ref-h", f.ref_h, "Reference h of an h study");
  c.opts["epsilons"] = a->add_option("--epsilons", f.epsilons, "Damping values of the oracle")
                         ->delimiter(',');
  c.opts["plot"] = a->add_flag("--svg", f.plot, "Also render SVG plots");
}

RunConfig Merge(const Command &c, const Flags &f)
{
  RunConfig cfg;
  if (c.Given("config"))
  {
    cfg.config_file = f.config;
    cfg = ApplyConfigFile(cfg, ReadKeyValueFile(f.config));
    cfg.config_file = f.config;
  }
  if (c.Given("example"))
  {
    cfg.example = f.example;
    cfg.config_file.clear();
  }
  if (c.Given("bc"))
  {
    cfg.bc = ParseBoundaryCondition(f.bc);
  }
  if (c.Given("method"))
  {
    cfg.method = ParseMethod(f.method);
  }
  if (c.Given("h"))
  {
    cfg.h = f.h.front();
  }
  if (c.Given("N"))
  {
    cfg.N = f.N.front();
  }
  if (c.Given("delta"))
  {
    cfg.delta = f.delta;
  }
  if (c.Given("sigma"))
  {
    cfg.sigma = f.sigma;
  }
  if (c.Given("cells"))
  {
    cfg.cells = f.cells;
  }
  if (c.Given("out"))
  {
    cfg.out_dir = f.out;
  }
  if (c.Given("ref-N"))
  {
    cfg.ref_N = f.ref_N;
  }
  if (c.Given("ref-h"))
  {
    cfg.ref_h = f.ref_h;
  }
  if (c.Given("epsilons"))
  {
    cfg.epsilons = f.epsilons;
  }
  if (c.Given("threads"))
  {
    cfg.threads = f.threads;
  }
  cfg.verbose = f.verbose;
  cfg.Validate();
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

std::string OutPath(const RunConfig &cfg, const std::string &name)
{
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void Plot(const RunConfig &cfg, bool enabled, const std::string &kind, const std::string &stem)
{
  if (enabled)
  {
    EmitPlot(kind, OutPath(cfg, stem + ".csv"), OutPath(cfg, stem + ".svg"));
  }
}

int RunDispersion(const Command &c, const Flags &f)
{
  const RunConfig cfg = Merge(c, f);
  const ScatteringProblem prob = ProblemOf(cfg);
  const Discretization d = Discretize(prob.n, cfg.h, prob.bc);
  std::vector<double> alphas(f.samples);
  for (int i = 0; i < f.samples; i++)
  {
    alphas[i] = -pi + 2.0 * pi * i / (f.samples - 1);
  }
  const DispersionDiagram dd = DispersionBranches(d.P, alphas, f.branches);
  WriteDispersionCsv(OutPath(cfg, "dispersion.csv"), dd);
  Plot(cfg, f.plot, "dispersion", "dispersion");
  std::cout << "wrote " << OutPath(cfg, "dispersion.csv") << " (" << f.branches
            << " branches, k^2 = " << prob.KSquared() << ")\n";
  return 0;
}

int RunExceptional(const Command &c, const Flags &f)
{
  const RunConfig cfg = Merge(c, f);
  Workspace ws(ProblemOf(cfg));
  std::vector<double> hs = c.Given("h") ? f.h : std::vector<double>{cfg.h};
  std::sort(hs.begin(), hs.end(), std::greater<double>());
  json rep = json::array();
  std::vector<double> positive;
  for (double h : hs)
  {
    const SpectralAnalysis &sa = ws.Spectral(h);
    json row{{"h", h}, {"m_prime", ws.Disc(h).P.A1.rows()}};
    json vals = json::array();
    double pos = -1.0;
    std::cout << "h = " << h << ":";
    for (std::size_t e = 0; e < sa.modes.size(); e++)
    {
      const ModeSystem &m = sa.modes[e];
      vals.push_back(json{{"beta_hat", m.beta_hat}, {"lambdas", m.lambdas}});
      std::cout << " " << m.beta_hat;
      if (m.beta_hat > 0.0)
      {
        pos = std::max(pos, m.beta_hat);
      }
    }
    std::cout << "\n";
    row["exceptional_values"] = vals;
    row["S_plus"] = sa.classification.S_plus;
    row["S_minus"] = sa.classification.S_minus;
    json cx = json::array();
    for (cplx z : sa.spectrum.complex)
    {
      cx.push_back(json::array({z.real(), z.imag()}));
    }
    row["complex_near_axis"] = cx;
    rep.push_back(row);
    positive.push_back(pos);
  }
  json out{{"problem", ws.Problem().name}, {"k_squared", ws.Problem().KSquared()},
           {"bc", ToString(ws.Problem().bc)}, {"levels", rep}};
  if (hs.size() >= 3 && *std::min_element(positive.begin(), positive.end()) > 0.0)
  {
    const EigenErrorTable t = EstimateEigenError(hs, positive);
    out["largest_positive_error_table"] =
      json{{"values", t.values}, {"errors_vs_finest", t.errors_vs_finest}, {"slope", t.slope},
           {"warning", t.warning}};
    std::cout << "slope of |beta(h) - beta(h_min)|: " << t.slope << "\n";
  }
  WriteTextFile(OutPath(cfg, "exceptional.json"), out.dump(2));
  return 0;
}

int RunSolve(const Command &c, const Flags &f)
{
  const RunConfig cfg = Merge(c, f);
  Workspace ws(ProblemOf(cfg));
  const MethodRun run = RunMethod(ws, cfg, cfg.method, cfg.h, cfg.N);
  WriteFieldCsv(OutPath(cfg, "field.csv"), run.disc->mesh, run.fields);
  WriteTextFile(OutPath(cfg, "report.json"), run.report_json);
  if (cfg.method == Method::cci)
  {
    const SpectralAnalysis &sa = ws.Spectral(cfg.h);
    const double delta = cfg.delta.value_or(DefaultDelta([&]
    {
      std::vector<double> ex;
      for (const auto &m : sa.modes)
      {
        ex.push_back(m.beta_hat);
      }
      return ex;
    }()));
    WriteContourCsv(CciContour(sa, delta, 8), 800, OutPath(cfg, "contour.csv"));
    Plot(cfg, f.plot, "contour", "contour");
  }
  Plot(cfg, f.plot, "field", "field");
  std::cout << "wrote " << OutPath(cfg, "field.csv") << " and " << OutPath(cfg, "report.json")
            << "\n";
  return 0;
}

void PrintTable(const ConvergenceTable &t)
{
  std::cout << t.axis << "        rel_err\n";
  for (std::size_t i = 0; i < t.params.size(); i++)
  {
    std::cout << t.params[i] << "   " << t.errors[i] << "\n";
  }
  std::cout << "slope " << t.slope << " (reference: " << t.reference << ")\n";
}

void WriteStudy(const RunConfig &cfg, bool plot, const ConvergenceTable &t, const std::string &stem)
{
  WriteConvergenceCsv(OutPath(cfg, stem + ".csv"), t);
  WriteTextFile(OutPath(cfg, stem + ".json"), ConvergenceJson(t));
  Plot(cfg, plot, "convergence", stem);
  PrintTable(t);
}

int RunConverge(const Command &c, const Flags &f)
{
  const RunConfig cfg = Merge(c, f);
  Workspace ws(ProblemOf(cfg));
  if (f.axis == "N")
  {
    if (!c.Given("N"))
    {
      throw Error(ErrorCode::config, "an N study needs --N with a comma list, e.g. 16,32,64");
    }
    for (int N : f.N)
    {
      if (N < 4 || N % 2 != 0)
      {
        throw Error(ErrorCode::config, "every N must be even and at least 4");
      }
    }
    WriteStudy(cfg, f.plot, ConvergeN(ws, cfg, f.N), "convergence");
  }
  else if (f.axis == "h")
  {
    if (!c.Given("h"))
    {
      throw Error(ErrorCode::config, "an h study needs --h with a comma list, e.g. 0.04,0.02");
    }
    WriteStudy(cfg, f.plot, ConvergeH(ws, cfg, f.h), "convergence");
  }
  else
  {
    throw Error(ErrorCode::config, "--axis must be N or h");
  }
  return 0;
}

int RunCompare(const Command &c, const Flags &f)
{
  const RunConfig cfg = Merge(c, f);
  Workspace ws(ProblemOf(cfg));
  const std::vector<double> hs = c.Given("h") ? f.h : std::vector<double>{cfg.h};
  WriteStudy(cfg, f.plot, CompareMethods(ws, cfg, hs), "compare");
  return 0;
}

int RunOracleVerb(const Command &c, const Flags &f)
{
  RunConfig cfg = Merge(c, f);
  cfg.method = Method::oracle;
  Workspace ws(ProblemOf(cfg));
  const OracleRun orc = RunOracle(ws, cfg, cfg.h);
  WriteFieldCsv(OutPath(cfg, "oracle_field.csv"), orc.disc->mesh, {orc.extrapolation.field});
  WriteTextFile(OutPath(cfg, "oracle_report.json"), orc.report_json);
  std::cout << "extrapolation indicator " << orc.extrapolation.error_indicator << "\n";
  if (c.Given("N"))
  {
    // Cross-check against the CCI solution on the same mesh.
    const MethodRun ref = RunMethod(ws, cfg, Method::cci, cfg.h, cfg.N);
    const double d = RelativeDifference(orc.extrapolation.field, orc.disc->mesh,
                                        ref.fields.front(), ref.disc->mesh);
    std::cout << "relative L2 difference to cci (N = " << cfg.N << "): " << d << "\n";
  }
  return 0;
}

int RunPlot(const Flags &f)
{
  if (f.kind.empty())
  {
    throw Error(ErrorCode::config, "plot needs --kind dispersion|contour|field|convergence");
  }
  const std::string dir = f.out.empty() ? "." : f.out;
  std::string csv = f.csv;
  if (csv.empty())
  {
    csv = (std::filesystem::path(dir) / (f.kind + ".csv")).string();
  }
  std::string svg = f.svg;
  if (svg.empty())
  {
    svg = std::filesystem::path(csv).replace_extension(".svg").string();
  }
  EmitPlot(f.kind, csv, svg);
  std::cout << "wrote " << svg << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"lapwave: Helmholtz scattering in periodic waveguides"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  Flags f;

  Command disp = AddCommon(app, "dispersion", "Dispersion branches over the Brillouin zone", f);
  disp.app->add_option("--branches", f.branches, "Number of branches")->check(CLI::Range(1, 64));
  disp.app->add_option("--samples", f.samples, "alpha samples")->check(CLI::Range(3, 100000));
  disp.opts["plot"] = disp.app->add_flag("--svg", f.plot, "Also render an SVG plot");

  Command exc = AddCommon(app, "exceptional", "Exceptional values and mode directions", f);

  Command solve = AddCommon(app, "solve", "Scattered field on the requested cells", f);
  AddSolverFlags(solve, f);
  Command conv = AddCommon(app, "converge", "Self-referenced convergence study", f);
  AddSolverFlags(conv, f);
  conv.app->add_option("--axis", f.axis, "N or h")->check(CLI::IsMember({"N", "h"}));
  Command cmp = AddCommon(app, "compare", "CCI against decomposition over h", f);
  AddSolverFlags(cmp, f);
  Command orc = AddCommon(app, "oracle", "Damped truncation extrapolated to zero damping", f);
  AddSolverFlags(orc, f);

  CLI::App *plot = app.add_subcommand("plot", "Render a study CSV as SVG");
  plot->add_option("--kind", f.kind, "dispersion | contour | field | convergence")->required();
  plot->add_option("--csv", f.csv, "Input CSV (default <out>/<kind>.csv)");
  plot->add_option("--svg", f.svg, "Output SVG (default next to the CSV)");
  plot->add_option("--out", f.out, "Directory holding the CSV");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ExitCodeOf(ErrorCode::config);
  }

  try
  {
    if (*disp.app)
    {
      return RunDispersion(disp, f);
    }
    if (*exc.app)
    {
      return RunExceptional(exc, f);
    }
    if (*solve.app)
    {
      return RunSolve(solve, f);
    }
    if (*conv.app)
    {
      return RunConverge(conv, f);
    }
    if (*cmp.app)
    {
      return RunCompare(cmp, f);
    }
    if (*orc.app)
    {
      return RunOracleVerb(orc, f);
    }
    return RunPlot(f);
  }
  catch (const Error &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeOf(e.code());
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
