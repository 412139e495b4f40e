// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef LAPWAVE_MESH_HPP
#define LAPWAVE_MESH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>
#include "lapwave/types.hpp"

namespace lapwave
{

struct Point
{
  double x1, x2;
};

// Bit flags; corner nodes carry two of them.
enum BoundaryTag : std::uint8_t
{
  tag_interior = 0,
  tag_left = 1,
  tag_right = 2,
  tag_bottom = 4,
  tag_top = 8
};

// Triangulation of the reference cell (-1/2, 1/2) x (0, 1).
struct CellMesh
{
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  double h = 0.0;
  std::vector<std::pair<int, int>> left_right_pairs;
  std::vector<std::uint8_t> boundary_tags;

  int NumVertices() const { return static_cast<int>(vertices.size()); }
  int NumTriangles() const { return static_cast<int>(triangles.size()); }
  double TriangleArea(int t) const;
  double MaxEdge() const;
  double MinEdge() const;
};

// Maps mesh nodes to periodic degrees of freedom; -1 marks nodes removed by a Dirichlet
// condition.
struct PeriodicBasis
{
  std::vector<int> dof_of_node;
  std::vector<int> node_of_dof;
  int m_prime = 0;
  BoundaryCondition bc = BoundaryCondition::neumann;
};

// Uniform grid split along one diagonal; h is the mean of leg and diagonal length, so
// there are ceil((1 + sqrt 2) / (2h)) squares per side.
std::pair<CellMesh, PeriodicBasis> BuildCellMesh(double h, BoundaryCondition bc);
PeriodicBasis BuildPeriodicBasis(const CellMesh &mesh, BoundaryCondition bc);

// Checks area sum, pairing geometry and tag consistency; throws on violation.
void ValidateMesh(const CellMesh &mesh);

void WriteMesh(const CellMesh &mesh, const std::string &path);
CellMesh ReadMesh(const std::string &path);

// Constant-gradient P1 data and three-point (degree 2) quadrature on every triangle.
struct CellQuadrature
{
  static constexpr int points_per_triangle = 3;
  std::vector<Point> points;                // size 3 * ntri
  std::vector<double> weights;              // area / 3
  std::vector<std::array<double, 2>> grad;  // size 3 * ntri, basis gradient per local vertex
  static constexpr double bary[3][3] = {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
                                        {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
                                        {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}};

  int Size() const { return static_cast<int>(points.size()); }
};

CellQuadrature BuildQuadrature(const CellMesh &mesh);

// Finds the triangle containing a point of the closed reference cell and its barycentric
// coordinates. Uses a uniform bucket grid.
class PointLocator
{
public:
  explicit PointLocator(const CellMesh &mesh);
  // Returns false when the point lies outside the mesh.
  bool Locate(double x1, double x2, int &tri, std::array<double, 3> &bary) const;

private:
  const CellMesh &mesh_;
  int nb_;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace lapwave

#endif  // LAPWAVE_MESH_HPP
