// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef LAPWAVE_CONTOUR_HPP
#define LAPWAVE_CONTOUR_HPP

#include <functional>
#include <string>
#include <vector>
#include "lapwave/fem.hpp"
#include "lapwave/mesh.hpp"
#include "lapwave/types.hpp"

namespace lapwave
{

// w(t) = int_0^t (tau(1 - tau))^p / int_0^1 (tau(1 - tau))^p, flat to order p at 0 and 1.
struct SmoothReparam
{
  int p = 8;
  double Value(double t) const;
  double Deriv(double t) const;
};

SmoothReparam MakeSmoothReparam(int p);

// Piecewise path in the complex alpha plane parameterized over t in [0, 1]. Each piece is
// a segment or a circular arc traversed with the smooth reparameterization, so every
// derivative through order p vanishes at the knots.
class ContourParam
{
public:
  struct Piece
  {
    bool arc = false;
    double t0 = 0.0, t1 = 1.0;
    cplx z0, z1;        // segment endpoints
    cplx center;        // arc center
    double radius = 0.0;
    double theta0 = 0.0, theta1 = 0.0;
  };

  ContourParam() = default;
  ContourParam(std::vector<Piece> pieces, int p);

  cplx Eval(double t) const;
  cplx Deriv(double t) const;
  std::vector<double> Knots() const;
  int SmoothingOrder() const { return reparam_.p; }
  const std::vector<Piece> &Pieces() const { return pieces_; }

private:
  const Piece &PieceAt(double t) const;
  std::vector<Piece> pieces_;
  SmoothReparam reparam_;
};

// Real axis from -pi to pi, dipping below each alpha in S_plus and rising above each
// alpha in S_minus on half-circles of radius delta.
ContourParam BuildCciContour(const std::vector<double> &S_plus,
                             const std::vector<double> &S_minus, double delta, int p = 8);

// g(t) = -pi + 2 pi w(t) + i sigma.
ContourParam BuildShiftedLine(double sigma, int p = 8);

// Half the smallest gap among the exceptional values and +-pi, capped at 0.3.
double DefaultDelta(const std::vector<double> &exceptional);

// Smallest distance from the contour nodes s(l/N) to any of the points.
double MinNodeDistance(const ContourParam &c, int N, const std::vector<double> &points);

struct TrigGrid
{
  int N = 0;
  explicit TrigGrid(int n);
  double Node(int l) const { return static_cast<double>(l) / N; }  // l = 1..N
  // xi_l(t) = (1/N) sum_{m=-N/2+1}^{N/2} exp(i 2 pi m (t - t_l)).
  cplx Xi(int l, double t) const;
};

// N x M' coefficients, row l at the contour node t_l = (l + 1) / N.
struct BlochField
{
  Mat coeffs;
};

// u on Omega_c at every mesh vertex: (1 / (2 pi N)) sum_l exp(i s_l (x1 + c)) w_{l, dof}.
FieldOnCell ReconstructField(const BlochField &w_hat, const ContourParam &contour,
                             const TrigGrid &grid, const CellMesh &mesh,
                             const PeriodicBasis &basis, int cell_index);

using ComplexField = std::function<cplx(double, double)>;

// sum_{c in cells} g(x + c e1) exp(-i alpha (x1 + c)) at points of Omega_0.
Vec BlochTransformCompact(const ComplexField &g, const std::vector<int> &cells, cplx alpha,
                          const std::vector<Point> &points);

void WriteContourCsv(const ContourParam &c, int samples, const std::string &path);

}  // namespace lapwave

#endif  // LAPWAVE_CONTOUR_HPP
