// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lapwave/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace lapwave
{

namespace
{

constexpr double geom_tol = 1e-12;

std::uint8_t TagOf(const Point &p)
{
  std::uint8_t tag = tag_interior;
  if (std::abs(p.x1 + 0.5) < geom_tol)
  {
    tag |= tag_left;
  }
  if (std::abs(p.x1 - 0.5) < geom_tol)
  {
    tag |= tag_right;
  }
  if (std::abs(p.x2) < geom_tol)
  {
    tag |= tag_bottom;
  }
  if (std::abs(p.x2 - 1.0) < geom_tol)
  {
    tag |= tag_top;
  }
  return tag;
}

double Dist(const Point &a, const Point &b)
{
  return std::hypot(a.x1 - b.x1, a.x2 - b.x2);
}

void PairBoundaries(CellMesh &mesh)
{
  std::map<double, int> left;
  for (int v = 0; v < mesh.NumVertices(); v++)
  {
    if (mesh.boundary_tags[v] & tag_left)
    {
      left[mesh.vertices[v].x2] = v;
    }
  }
  mesh.left_right_pairs.clear();
  for (int v = 0; v < mesh.NumVertices(); v++)
  {
    if (mesh.boundary_tags[v] & tag_right)
    {
      auto it = left.find(mesh.vertices[v].x2);
      if (it == left.end())
      {
        throw Error(ErrorCode::invalid_argument,
                    "right boundary node without a matching left node at x2 = " +
                        std::to_string(mesh.vertices[v].x2));
      }
      mesh.left_right_pairs.emplace_back(it->second, v);
    }
  }
  if (mesh.left_right_pairs.size() != left.size())
  {
    throw Error(ErrorCode::invalid_argument, "left and right boundary node counts differ");
  }
  std::sort(mesh.left_right_pairs.begin(), mesh.left_right_pairs.end());
}

}  // namespace

double CellMesh::TriangleArea(int t) const
{
  const auto &tri = triangles[t];
  const Point &a = vertices[tri[0]], &b = vertices[tri[1]], &c = vertices[tri[2]];
  return 0.5 * ((b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2));
}

double CellMesh::MaxEdge() const
{
  double e = 0.0;
  for (const auto &tri : triangles)
  {
    for (int i = 0; i < 3; i++)
    {
      e = std::max(e, Dist(vertices[tri[i]], vertices[tri[(i + 1) % 3]]));
    }
  }
  return e;
}

double CellMesh::MinEdge() const
{
  double e = std::numeric_limits<double>::max();
  for (const auto &tri : triangles)
  {
    for (int i = 0; i < 3; i++)
    {
      e = std::min(e, Dist(vertices[tri[i]], vertices[tri[(i + 1) % 3]]));
    }
  }
  return e;
}

std::pair<CellMesh, PeriodicBasis> BuildCellMesh(double h, BoundaryCondition bc)
{
  if (!(h > 0.0 && h < 0.5))
  {
    throw Error(ErrorCode::invalid_argument, "mesh size h must lie in (0, 0.5)");
  }
  // h is the mean of the shortest (leg) and longest (diagonal) edge.
  const int n = static_cast<int>(std::ceil(0.5 * (1.0 + std::sqrt(2.0)) / h - 1e-9));
  CellMesh mesh;
  mesh.h = h;
  mesh.vertices.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; j++)
  {
    for (int i = 0; i <= n; i++)
    {
      // Exact endpoints so that paired nodes match bit for bit.
      const double x1 = (i == n) ? 0.5 : -0.5 + static_cast<double>(i) / n;
      const double x2 = (j == n) ? 1.0 : static_cast<double>(j) / n;
      mesh.vertices.push_back({x1, x2});
    }
  }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  mesh.triangles.reserve(2 * n * n);
  for (int j = 0; j < n; j++)
  {
    for (int i = 0; i < n; i++)
    {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }
  mesh.boundary_tags.resize(mesh.vertices.size());
  for (int v = 0; v < mesh.NumVertices(); v++)
  {
    mesh.boundary_tags[v] = TagOf(mesh.vertices[v]);
  }
  PairBoundaries(mesh);
  PeriodicBasis basis = BuildPeriodicBasis(mesh, bc);
  return {std::move(mesh), std::move(basis)};
}

PeriodicBasis BuildPeriodicBasis(const CellMesh &mesh, BoundaryCondition bc)
{
  PeriodicBasis basis;
  basis.bc = bc;
  basis.dof_of_node.assign(mesh.vertices.size(), -1);
  std::vector<int> partner(mesh.vertices.size(), -1);
  for (const auto &[l, r] : mesh.left_right_pairs)
  {
    partner[r] = l;
  }
  for (int v = 0; v < mesh.NumVertices(); v++)
  {
    const auto tag = mesh.boundary_tags[v];
    if (tag & tag_right)
    {
      continue;
    }
    if (bc == BoundaryCondition::dirichlet && (tag & (tag_bottom | tag_top)))
    {
      continue;
    }
    basis.dof_of_node[v] = basis.m_prime++;
    basis.node_of_dof.push_back(v);
  }
  for (int v = 0; v < mesh.NumVertices(); v++)
  {
    if (mesh.boundary_tags[v] & tag_right)
    {
      if (partner[v] < 0)
      {
        throw Error(ErrorCode::invalid_argument, "unpaired right boundary node");
      }
      basis.dof_of_node[v] = basis.dof_of_node[partner[v]];
    }
  }
  return basis;
}

void ValidateMesh(const CellMesh &mesh)
{
  double area = 0.0;
  for (int t = 0; t < mesh.NumTriangles(); t++)
  {
    const double a = mesh.TriangleArea(t);
    if (a <= 0.0)
    {
      throw Error(ErrorCode::invalid_argument, "triangle with non-positive orientation");
    }
    area += a;
  }
  if (std::abs(area - 1.0) > 1e-12)
  {
    throw Error(ErrorCode::invalid_argument, "triangle areas do not sum to 1");
  }
  for (const auto &[l, r] : mesh.left_right_pairs)
  {
    const Point &pl = mesh.vertices[l], &pr = mesh.vertices[r];
    if (pl.x2 != pr.x2 || pr.x1 - pl.x1 != 1.0)
    {
      throw Error(ErrorCode::invalid_argument, "left/right pair is not a unit translate");
    }
  }
  if (mesh.MaxEdge() / mesh.MinEdge() > 4.0)
  {
    throw Error(ErrorCode::invalid_argument, "mesh is not quasi-uniform");
  }
}

void WriteMesh(const CellMesh &mesh, const std::string &path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw Error(ErrorCode::io, "cannot open " + path);
  }
  out.precision(17);
  out << "h " << mesh.h << "\n";
  out << "vertices " << mesh.vertices.size() << "\n";
  for (std::size_t v = 0; v < mesh.vertices.size(); v++)
  {
    out << mesh.vertices[v].x1 << " " << mesh.vertices[v].x2 << " "
        << static_cast<int>(mesh.boundary_tags[v]) << "\n";
  }
  out << "triangles " << mesh.triangles.size() << "\n";
  for (const auto &t : mesh.triangles)
  {
    out << t[0] << " " << t[1] << " " << t[2] << "\n";
  }
  out << "pairs " << mesh.left_right_pairs.size() << "\n";
  for (const auto &[l, r] : mesh.left_right_pairs)
  {
    out << l << " " << r << "\n";
  }
}

CellMesh ReadMesh(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw Error(ErrorCode::io, "cannot open " + path);
  }
  auto expect = [&in, &path](const std::string &key)
  {
    std::string word;
    in >> word;
    if (word != key)
    {
      throw Error(ErrorCode::io, path + ": expected '" + key + "', found '" + word + "'");
    }
  };
  CellMesh mesh;
  std::size_t count = 0;
  expect("h");
  in >> mesh.h;
  expect("vertices");
  in >> count;
  mesh.vertices.resize(count);
  mesh.boundary_tags.resize(count);
  for (std::size_t v = 0; v < count; v++)
  {
    int tag = 0;
    in >> mesh.vertices[v].x1 >> mesh.vertices[v].x2 >> tag;
    mesh.boundary_tags[v] = static_cast<std::uint8_t>(tag);
  }
  expect("triangles");
  in >> count;
  mesh.triangles.resize(count);
  for (auto &t : mesh.triangles)
  {
    in >> t[0] >> t[1] >> t[2];
  }
  expect("pairs");
  in >> count;
  mesh.left_right_pairs.resize(count);
  for (auto &p : mesh.left_right_pairs)
  {
    in >> p.first >> p.second;
  }
  if (!in)
  {
    throw Error(ErrorCode::io, path + ": truncated mesh file");
  }
  return mesh;
}

CellQuadrature BuildQuadrature(const CellMesh &mesh)
{
  CellQuadrature quad;
  const int nt = mesh.NumTriangles();
  quad.points.reserve(3 * nt);
  quad.weights.reserve(3 * nt);
  quad.grad.reserve(3 * nt);
  for (int t = 0; t < nt; t++)
  {
    const auto &tri = mesh.triangles[t];
    const Point &a = mesh.vertices[tri[0]], &b = mesh.vertices[tri[1]],
                &c = mesh.vertices[tri[2]];
    const double det = (b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2);
    const double area = 0.5 * det;
    // Gradients of the barycentric coordinates.
    quad.grad.push_back({(b.x2 - c.x2) / det, (c.x1 - b.x1) / det});
    quad.grad.push_back({(c.x2 - a.x2) / det, (a.x1 - c.x1) / det});
    quad.grad.push_back({(a.x2 - b.x2) / det, (b.x1 - a.x1) / det});
    for (int q = 0; q < 3; q++)
    {
      const double *l = CellQuadrature::bary[q];
      quad.points.push_back({l[0] * a.x1 + l[1] * b.x1 + l[2] * c.x1,
                             l[0] * a.x2 + l[1] * b.x2 + l[2] * c.x2});
      quad.weights.push_back(area / 3.0);
    }
  }
  return quad;
}

PointLocator::PointLocator(const CellMesh &mesh) : mesh_(mesh)
{
  nb_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.NumTriangles()) / 2)));
  buckets_.resize(nb_ * nb_);
  for (int t = 0; t < mesh.NumTriangles(); t++)
  {
    double lo1 = 1e9, hi1 = -1e9, lo2 = 1e9, hi2 = -1e9;
    for (int v : mesh.triangles[t])
    {
      lo1 = std::min(lo1, mesh.vertices[v].x1);
      hi1 = std::max(hi1, mesh.vertices[v].x1);
      lo2 = std::min(lo2, mesh.vertices[v].x2);
      hi2 = std::max(hi2, mesh.vertices[v].x2);
    }
    auto cell = [this](double x, double offset)
    { return std::clamp(static_cast<int>((x + offset) * nb_), 0, nb_ - 1); };
    for (int j = cell(lo2 - 1e-12, 0.0); j <= cell(hi2 + 1e-12, 0.0); j++)
    {
      for (int i = cell(lo1 - 1e-12, 0.5); i <= cell(hi1 + 1e-12, 0.5); i++)
      {
        buckets_[j * nb_ + i].push_back(t);
      }
    }
  }
}

bool PointLocator::Locate(double x1, double x2, int &tri, std::array<double, 3> &bary) const
{
  const int i = std::clamp(static_cast<int>((x1 + 0.5) * nb_), 0, nb_ - 1);
  const int j = std::clamp(static_cast<int>(x2 * nb_), 0, nb_ - 1);
  for (int t : buckets_[j * nb_ + i])
  {
    const auto &tr = mesh_.triangles[t];
    const Point &a = mesh_.vertices[tr[0]], &b = mesh_.vertices[tr[1]],
                &c = mesh_.vertices[tr[2]];
    const double det = (b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2);
    const double l1 = ((x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (x2 - a.x2)) / det;
    const double l2 = ((b.x1 - a.x1) * (x2 - a.x2) - (x1 - a.x1) * (b.x2 - a.x2)) / det;
    const double l0 = 1.0 - l1 - l2;
    if (l0 >= -1e-12 && l1 >= -1e-12 && l2 >= -1e-12)
    {
      tri = t;
      bary = {l0, l1, l2};
      return true;
    }
  }
  return false;
}

}  // namespace lapwave
