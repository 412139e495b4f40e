// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lapwave/contour.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include "ramp.hpp"

namespace lapwave
{

double SmoothReparam::Value(double t) const
{
  return detail::BetaRamp(p, t)[0];
}

double SmoothReparam::Deriv(double t) const
{
  return detail::BetaRamp(p, t)[1];
}

SmoothReparam MakeSmoothReparam(int p)
{
  if (p < 4 || p % 2 != 0)
  {
    throw Error(ErrorCode::invalid_argument, "smoothing order must be even and at least 4");
  }
  return SmoothReparam{p};
}

ContourParam::ContourParam(std::vector<Piece> pieces, int p)
  : pieces_(std::move(pieces)), reparam_(MakeSmoothReparam(p))
{
  if (pieces_.empty())
  {
    throw Error(ErrorCode::contour_configuration, "contour without pieces");
  }
}

const ContourParam::Piece &ContourParam::PieceAt(double t) const
{
  for (const auto &pc : pieces_)
  {
    if (t <= pc.t1)
    {
      return pc;
    }
  }
  return pieces_.back();
}

cplx ContourParam::Eval(double t) const
{
  const Piece &pc = PieceAt(t);
  const double w = reparam_.Value((t - pc.t0) / (pc.t1 - pc.t0));
  if (!pc.arc)
  {
    return pc.z0 + (pc.z1 - pc.z0) * w;
  }
  const double theta = pc.theta0 + (pc.theta1 - pc.theta0) * w;
  return pc.center + pc.radius * std::exp(I * theta);
}

cplx ContourParam::Deriv(double t) const
{
  const Piece &pc = PieceAt(t);
  const double dt = pc.t1 - pc.t0;
  const double tau = (t - pc.t0) / dt;
  const double dw = reparam_.Deriv(tau) / dt;
  if (!pc.arc)
  {
    return (pc.z1 - pc.z0) * dw;
  }
  const double theta = pc.theta0 + (pc.theta1 - pc.theta0) * reparam_.Value(tau);
  return I * pc.radius * std::exp(I * theta) * (pc.theta1 - pc.theta0) * dw;
}

std::vector<double> ContourParam::Knots() const
{
  std::vector<double> k{pieces_.front().t0};
  for (const auto &pc : pieces_)
  {
    k.push_back(pc.t1);
  }
  return k;
}

ContourParam BuildCciContour(const std::vector<double> &S_plus,
                             const std::vector<double> &S_minus, double delta, int p)
{
  for (double a : S_plus)
  {
    for (double b : S_minus)
    {
      if (std::abs(a - b) < 1e-9)
      {
        throw Error(ErrorCode::assumption3,
                    "exceptional value " + std::to_string(a) + " is in both S+ and S-");
      }
    }
  }
  std::vector<std::pair<double, bool>> pts;
  for (double a : S_plus)
  {
    pts.emplace_back(a, true);
  }
  for (double a : S_minus)
  {
    pts.emplace_back(a, false);
  }
  std::sort(pts.begin(), pts.end());
  if (!pts.empty() && !(delta > 0.0))
  {
    throw Error(ErrorCode::contour_configuration, "delta must be positive");
  }
  for (std::size_t i = 0; i < pts.size(); i++)
  {
    const double a = pts[i].first;
    if (!(a - delta > -pi && a + delta < pi))
    {
      throw Error(ErrorCode::contour_configuration,
                  "indentation disk around " + std::to_string(a) + " reaches +-pi");
    }
    if (i > 0 && !(a - pts[i - 1].first > 2.0 * delta))
    {
      throw Error(ErrorCode::contour_configuration,
                  "indentation disks around " + std::to_string(pts[i - 1].first) + " and " +
                      std::to_string(a) + " overlap");
    }
  }
  struct Raw
  {
    ContourParam::Piece piece;
    double length;
  };
  std::vector<Raw> raw;
  double x = -pi;
  auto segment = [&raw](double from, double to)
  {
    ContourParam::Piece pc;
    pc.z0 = from;
    pc.z1 = to;
    raw.push_back({pc, to - from});
  };
  for (const auto &[a, plus] : pts)
  {
    segment(x, a - delta);
    ContourParam::Piece pc;
    pc.arc = true;
    pc.center = a;
    pc.radius = delta;
    pc.theta0 = pi;
    pc.theta1 = plus ? 2.0 * pi : 0.0;
    raw.push_back({pc, pi * delta});
    x = a + delta;
  }
  segment(x, pi);
  double total = 0.0;
  for (const auto &r : raw)
  {
    total += r.length;
  }
  std::vector<ContourParam::Piece> pieces;
  double acc = 0.0;
  for (std::size_t i = 0; i < raw.size(); i++)
  {
    ContourParam::Piece pc = raw[i].piece;
    pc.t0 = acc / total;
    acc += raw[i].length;
    pc.t1 = (i + 1 == raw.size()) ? 1.0 : acc / total;
    pieces.push_back(pc);
  }
  return ContourParam(std::move(pieces), p);
}

ContourParam BuildShiftedLine(double sigma, int p)
{
  if (!(sigma > 0.0))
  {
    throw Error(ErrorCode::invalid_argument, "sigma must be positive");
  }
  ContourParam::Piece pc;
  pc.z0 = cplx(-pi, sigma);
  pc.z1 = cplx(pi, sigma);
  pc.t0 = 0.0;
  pc.t1 = 1.0;
  return ContourParam({pc}, p);
}

double DefaultDelta(const std::vector<double> &exceptional)
{
  std::vector<double> pts = exceptional;
  std::sort(pts.begin(), pts.end());
  double gap = 0.6;
  for (std::size_t i = 0; i < pts.size(); i++)
  {
    gap = std::min(gap, pts[i] + pi);
    gap = std::min(gap, pi - pts[i]);
    if (i > 0)
    {
      gap = std::min(gap, pts[i] - pts[i - 1]);
    }
  }
  return std::min(0.3, 0.5 * gap);
}

double MinNodeDistance(const ContourParam &c, int N, const std::vector<double> &points)
{
  double d = 1e300;
  for (int l = 1; l <= N; l++)
  {
    const cplx s = c.Eval(static_cast<double>(l) / N);
    for (double a : points)
    {
      d = std::min(d, std::abs(s - a));
    }
  }
  return d;
}

TrigGrid::TrigGrid(int n) : N(n)
{
  if (n < 2 || n % 2 != 0)
  {
    throw Error(ErrorCode::invalid_argument, "N must be even and positive");
  }
}

cplx TrigGrid::Xi(int l, double t) const
{
  cplx s = 0.0;
  for (int m = -N / 2 + 1; m <= N / 2; m++)
  {
    s += std::exp(I * (2.0 * pi * m * (t - Node(l))));
  }
  return s / static_cast<double>(N);
}

FieldOnCell ReconstructField(const BlochField &w_hat, const ContourParam &contour,
                             const TrigGrid &grid, const CellMesh &mesh,
                             const PeriodicBasis &basis, int cell_index)
{
  if (w_hat.coeffs.rows() != grid.N || w_hat.coeffs.cols() != basis.m_prime)
  {
    throw Error(ErrorCode::dimension_mismatch, "Bloch field must be N x M'");
  }
  FieldOnCell u;
  u.cell_index = cell_index;
  u.values = Vec::Zero(mesh.NumVertices());
  const double scale = 1.0 / (2.0 * pi * grid.N);
  for (int l = 0; l < grid.N; l++)
  {
    const cplx s = contour.Eval(grid.Node(l + 1));
    for (int v = 0; v < mesh.NumVertices(); v++)
    {
      const int d = basis.dof_of_node[v];
      if (d >= 0)
      {
        u.values[v] += std::exp(I * s * (mesh.vertices[v].x1 + cell_index)) * w_hat.coeffs(l, d);
      }
    }
  }
  u.values *= scale;
  return u;
}

Vec BlochTransformCompact(const ComplexField &g, const std::vector<int> &cells, cplx alpha,
                          const std::vector<Point> &points)
{
  Vec out = Vec::Zero(static_cast<int>(points.size()));
  for (std::size_t i = 0; i < points.size(); i++)
  {
    for (int c : cells)
    {
      const double x1 = points[i].x1 + c;
      out[i] += g(x1, points[i].x2) * std::exp(-I * alpha * x1);
    }
  }
  return out;
}

void WriteContourCsv(const ContourParam &c, int samples, const std::string &path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw Error(ErrorCode::io, "cannot open " + path);
  }
  out.precision(12);
  out << "t,re_s,im_s,re_ds,im_ds\n";
  for (int i = 0; i <= samples; i++)
  {
    const double t = static_cast<double>(i) / samples;
    const cplx s = c.Eval(t), ds = c.Deriv(t);
    out << t << "," << s.real() << "," << s.imag() << "," << ds.real() << "," << ds.imag()
        << "\n";
  }
}

}  // namespace lapwave
