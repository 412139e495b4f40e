// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include "lapwave/harness.hpp"

namespace lapwave
{

namespace
{

struct Table
{
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int Column(const std::string &name) const
  {
    for (std::size_t i = 0; i < header.size(); i++)
    {
      if (header[i] == name)
      {
        return static_cast<int>(i);
      }
    }
    throw Error(ErrorCode::missing_artifact, "CSV lacks column '" + name + "'");
  }
  std::vector<double> Values(int c) const
  {
    std::vector<double> v;
    for (const auto &r : rows)
    {
      v.push_back(r[c]);
    }
    return v;
  }
};

Table ReadCsv(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw Error(ErrorCode::missing_artifact, "cannot read " + path + "; run the study first");
  }
  Table t;
  std::string line;
  auto split = [](const std::string &s)
  {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
    {
      out.push_back(item);
    }
    return out;
  };
  if (!std::getline(in, line))
  {
    throw Error(ErrorCode::missing_artifact, path + " is empty");
  }
  t.header = split(line);
  while (std::getline(in, line))
  {
    if (line.empty())
    {
      continue;
    }
    std::vector<double> row;
    for (const auto &s : split(line))
    {
      row.push_back(std::stod(s));
    }
    if (row.size() != t.header.size())
    {
      throw Error(ErrorCode::io, "malformed row in " + path);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string Num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Series
{
  std::string name;
  std::vector<double> x, y;
  bool markers = false;
};

const char *const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

// Frame geometry shared by the plots.
constexpr double W = 640, H = 440, L = 70, R = 20, T = 40, B = 50;

struct Axis
{
  double lo, hi;
  bool log;
  double Map(double v, double a, double b) const
  {
    const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo))
                         : (v - lo) / (hi - lo);
    return a + t * (b - a);
  }
  std::vector<double> Ticks() const
  {
    std::vector<double> out;
    if (log)
    {
      for (int e = static_cast<int>(std::floor(std::log10(lo)));
           e <= static_cast<int>(std::ceil(std::log10(hi))); e++)
      {
        const double v = std::pow(10.0, e);
        if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12))
        {
          out.push_back(v);
        }
      }
      if (out.size() < 2)
      {
        out = {lo, hi};
      }
      return out;
    }
    const double span = hi - lo;
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
    {
      if (m * mag >= raw)
      {
        step = m * mag;
        break;
      }
    }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
    {
      out.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    }
    return out;
  }
};

Axis MakeAxis(const std::vector<Series> &s, bool use_x, bool log)
{
  double lo = 1e300, hi = -1e300;
  for (const auto &ser : s)
  {
    for (double v : use_x ? ser.x : ser.y)
    {
      if (!std::isfinite(v) || (log && v <= 0.0))
      {
        continue;
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (lo > hi)
  {
    lo = log ? 1.0 : 0.0;
    hi = log ? 10.0 : 1.0;
  }
  if (hi == lo)
  {
    hi = log ? lo * 10.0 : lo + 1.0;
  }
  if (!log)
  {
    const double pad = 0.04 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return Axis{lo, hi, log};
}

std::string Frame(const std::string &title, const std::string &xlabel, const std::string &ylabel,
                  const Axis &ax, const Axis &ay)
{
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title
    << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
    << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double v : ax.Ticks())
  {
    const double x = ax.Map(v, L, W - R);
    o << "<line x1=\"" << x << "\" y1=\"" << H - B << "\" x2=\"" << x << "\" y2=\"" << H - B + 5
      << "\" stroke=\"black\"/><text x=\"" << x << "\" y=\"" << H - B + 18
      << "\" text-anchor=\"middle\">" << Num(v) << "</text>\n";
  }
  for (double v : ay.Ticks())
  {
    const double y = ay.Map(v, H - B, T);
    o << "<line x1=\"" << L - 5 << "\" y1=\"" << y << "\" x2=\"" << L << "\" y2=\"" << y
      << "\" stroke=\"black\"/><text x=\"" << L - 8 << "\" y=\"" << y + 4
      << "\" text-anchor=\"end\">" << Num(v) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
    << xlabel << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << ylabel << "</text>\n";
  return o.str();
}

std::string LinePlot(const std::string &title, const std::string &xlabel,
                     const std::string &ylabel, const std::vector<Series> &series, bool logx,
                     bool logy)
{
  const Axis ax = MakeAxis(series, true, logx), ay = MakeAxis(series, false, logy);
  std::ostringstream o;
  o << Frame(title, xlabel, ylabel, ax, ay);
  for (std::size_t s = 0; s < series.size(); s++)
  {
    const char *color = palette[s % 8];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); i++)
    {
      const double xv = series[s].x[i], yv = series[s].y[i];
      if ((logx && xv <= 0.0) || (logy && yv <= 0.0) || !std::isfinite(yv))
      {
        continue;
      }
      o << ax.Map(xv, L, W - R) << "," << ay.Map(yv, H - B, T) << " ";
    }
    o << "\"/>\n";
    if (series[s].markers)
    {
      for (std::size_t i = 0; i < series[s].x.size(); i++)
      {
        const double xv = series[s].x[i], yv = series[s].y[i];
        if ((logx && xv <= 0.0) || (logy && yv <= 0.0))
        {
          continue;
        }
        o << "<circle cx=\"" << ax.Map(xv, L, W - R) << "\" cy=\"" << ay.Map(yv, H - B, T)
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
    if (!series[s].name.empty())
    {
      o << "<text x=\"" << W - R - 8 << "\" y=\"" << T + 16 + 14 * s << "\" text-anchor=\"end\" fill=\""
        << color << "\">" << series[s].name << "</text>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

// Diverging blue-white-red colour for t in [-1, 1].
std::string Diverging(double t)
{
  t = std::clamp(t, -1.0, 1.0);
  int r, g, b;
  if (t < 0)
  {
    r = static_cast<int>(255 * (1 + t));
    g = r;
    b = 255;
  }
  else
  {
    r = 255;
    g = static_cast<int>(255 * (1 - t));
    b = g;
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string HeatPlot(const std::string &title, const Table &t)
{
  const int cx1 = t.Column("x1"), cx2 = t.Column("x2"), cre = t.Column("re_u");
  Series s;
  double umax = 0.0;
  for (const auto &r : t.rows)
  {
    s.x.push_back(r[cx1]);
    s.y.push_back(r[cx2]);
    umax = std::max(umax, std::abs(r[cre]));
  }
  const Axis ax = MakeAxis({s}, true, false), ay = MakeAxis({s}, false, false);
  // Cell size from the point density of the first cell.
  const double n = std::max(1.0, std::sqrt(static_cast<double>(t.rows.size())));
  const double dx = (ax.Map(ax.hi, L, W - R) - ax.Map(ax.lo, L, W - R)) / n * 1.2;
  const double dy = (ay.Map(ay.lo, H - B, T) - ay.Map(ay.hi, H - B, T)) / n * 1.2;
  std::ostringstream o;
  o << Frame(title + " (Re u, max |Re u| = " + Num(umax) + ")", "x1", "x2", ax, ay);
  for (const auto &r : t.rows)
  {
    const double x = ax.Map(r[cx1], L, W - R), y = ay.Map(r[cx2], H - B, T);
    o << "<rect x=\"" << x - dx / 2 << "\" y=\"" << y - dy / 2 << "\" width=\"" << dx
      << "\" height=\"" << dy << "\" fill=\"" << Diverging(umax > 0 ? r[cre] / umax : 0.0)
      << "\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace

void EmitPlot(const std::string &kind, const std::string &csv_path, const std::string &svg_path)
{
  const Table t = ReadCsv(csv_path);
  std::string svg;
  if (kind == "dispersion")
  {
    std::vector<Series> s;
    const std::vector<double> a = t.Values(t.Column("alpha"));
    for (std::size_t c = 1; c < t.header.size(); c++)
    {
      s.push_back({"", a, t.Values(static_cast<int>(c))});
    }
    svg = LinePlot("dispersion curves", "alpha", "mu", s, false, false);
  }
  else if (kind == "contour")
  {
    Series s{"contour", t.Values(t.Column("re_s")), t.Values(t.Column("im_s"))};
    svg = LinePlot("integration contour", "Re alpha", "Im alpha", {s}, false, false);
  }
  else if (kind == "field")
  {
    svg = HeatPlot("field", t);
  }
  else if (kind == "convergence")
  {
    Series s{"rel_err", t.Values(t.Column("param")), t.Values(t.Column("rel_err")), true};
    svg = LinePlot("convergence", "parameter", "relative error", {s}, true, true);
  }
  else
  {
    throw Error(ErrorCode::config,
                "unknown plot kind '" + kind + "' (use dispersion, contour, field, convergence)");
  }
  WriteTextFile(svg_path, svg);
}

}  // namespace lapwave
