// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lapwave/coupled.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <thread>
#include <Eigen/LU>
#include "lapwave/krylov.hpp"

namespace lapwave
{

namespace
{

// How node l reuses the factorization of its group owner o.
enum class Relation
{
  same,       // A_l = A_o
  transpose,  // A_l = A_o^T, from alpha_l = -alpha_o
  conjugate   // A_l = conj(A_o), from alpha_l = -conj(alpha_o)
};

bool Close(cplx a, cplx b)
{
  return std::abs(a - b) <= 1e-13 * (1.0 + std::abs(a));
}

struct Grouping
{
  std::vector<int> owners;
  std::vector<std::vector<std::pair<int, Relation>>> members;
};

Grouping GroupNodes(const std::vector<cplx> &alpha)
{
  Grouping g;
  const int N = static_cast<int>(alpha.size());
  std::vector<int> group_of(N, -1);
  for (int l = 0; l < N; l++)
  {
    for (std::size_t gi = 0; gi < g.owners.size() && group_of[l] < 0; gi++)
    {
      const cplx ao = alpha[g.owners[gi]];
      Relation rel;
      if (Close(alpha[l], ao))
      {
        rel = Relation::same;
      }
      else if (Close(alpha[l], -ao))
      {
        rel = Relation::transpose;
      }
      else if (Close(alpha[l], -std::conj(ao)))
      {
        rel = Relation::conjugate;
      }
      else
      {
        continue;
      }
      group_of[l] = static_cast<int>(gi);
      g.members[gi].emplace_back(l, rel);
    }
    if (group_of[l] < 0)
    {
      group_of[l] = static_cast<int>(g.owners.size());
      g.owners.push_back(l);
      g.members.push_back({{l, Relation::same}});
    }
  }
  return g;
}

class NodeSolver
{
public:
  NodeSolver(const SparseLU &lu, Relation rel) : lu_(lu), rel_(rel) {}
  Vec operator()(const Vec &b) const
  {
    switch (rel_)
    {
      case Relation::same:
        return lu_.Solve(b);
      case Relation::transpose:
        return lu_.Solve(b, SparseLU::Op::transpose);
      case Relation::conjugate:
        return lu_.Solve(b.conjugate().eval()).conjugate();
    }
    return Vec();
  }

private:
  const SparseLU &lu_;
  Relation rel_;
};

// Runs a callback for every contour node, factoring each group's matrix once per sweep
// unless it is cached. Groups are cut into a fixed number of contiguous chunks; callers
// accumulate per chunk and reduce in chunk order, so results do not depend on the thread
// count or on scheduling.
class Sweeper
{
public:
  Sweeper(const PencilMatrices &P, double k, const std::vector<cplx> &alpha, int threads,
          double cache_bytes)
    : P_(P), k_(k), alpha_(alpha), groups_(GroupNodes(alpha)), budget_(cache_bytes)
  {
    const int ng = static_cast<int>(groups_.owners.size());
    chunks_ = std::min(ng, 16);
    threads_ = std::max(1, std::min(threads, chunks_));
    cache_.resize(ng);
    checked_.assign(ng, 0);
    symbolic_ = SparseLU::Analyze(P_.Evaluate(alpha_[groups_.owners[0]], k_));
  }

  int NumChunks() const { return chunks_; }
  int NumGroups() const { return static_cast<int>(groups_.owners.size()); }
  int sweeps = 0;

  template <class Fn>
  void Run(Fn &&fn)
  {
    sweeps++;
    const int ng = NumGroups();
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&](int tid)
    {
      try
      {
        for (int chunk = tid; chunk < chunks_; chunk += threads_)
        {
          const int g0 = static_cast<int>(static_cast<long>(ng) * chunk / chunks_);
          const int g1 = static_cast<int>(static_cast<long>(ng) * (chunk + 1) / chunks_);
          for (int g = g0; g < g1; g++)
          {
            SparseLU local;
            const SparseLU *lu = Acquire(g, local);
            for (const auto &[l, rel] : groups_.members[g])
            {
              fn(l, NodeSolver(*lu, rel), chunk);
            }
          }
        }
      }
      catch (...)
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error)
        {
          error = std::current_exception();
        }
      }
    };
    if (threads_ == 1)
    {
      work(0);
    }
    else
    {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads_; t++)
      {
        pool.emplace_back(work, t);
      }
      for (auto &th : pool)
      {
        th.join();
      }
    }
    if (error)
    {
      std::rethrow_exception(error);
    }
  }

private:
  // Cached factorization of group g, or a fresh one held in local.
  const SparseLU *Acquire(int g, SparseLU &local)
  {
    if (const SparseLU *lu = cache_[g].get())
    {
      return lu;
    }
    const cplx a = alpha_[groups_.owners[g]];
    local.Factor(P_.Evaluate(a, k_), symbolic_);
    if (!checked_[g])
    {
      checked_[g] = 1;
      if (local.PivotRatio() < 1e-10 && local.ReciprocalCondition() < singular_rcond_threshold)
      {
        throw Error(ErrorCode::singular_cell_problem,
                    "A(alpha, k) is numerically singular at a contour node, alpha = " +
                        std::to_string(a.real()) + " + " + std::to_string(a.imag()) + "i");
      }
    }
    const double mem = local.MemoryBytes();
    double used = used_.load();
    while (used + mem <= budget_)
    {
      if (used_.compare_exchange_weak(used, used + mem))
      {
        cache_[g] = std::make_unique<SparseLU>(std::move(local));
        return cache_[g].get();
      }
    }
    return &local;
  }

  const PencilMatrices &P_;
  double k_;
  const std::vector<cplx> &alpha_;
  Grouping groups_;
  double budget_;
  int threads_ = 1;
  int chunks_ = 1;
  std::shared_ptr<void> symbolic_;
  std::vector<std::unique_ptr<SparseLU>> cache_;
  std::vector<char> checked_;
  std::atomic<double> used_{0.0};
};

int ResolveThreads(int requested)
{
  if (requested > 0)
  {
    return requested;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

CoupledSystem::CoupledSystem(const CellMesh &mesh, const PeriodicBasis &basis,
                             const PencilMatrices &P, double k, const CoefficientField &q,
                             std::vector<cplx> alpha, std::vector<cplx> dalpha)
  : mesh_(mesh), basis_(basis), P_(P), k_(k), alpha_(std::move(alpha)),
    dalpha_(std::move(dalpha)), quad_(BuildQuadrature(mesh))
{
  if (alpha_.size() != dalpha_.size() || alpha_.empty())
  {
    throw Error(ErrorCode::dimension_mismatch, "contour nodes and derivatives differ in size");
  }
  if (P_.Size() != basis_.m_prime)
  {
    throw Error(ErrorCode::dimension_mismatch, "pencil does not match the periodic basis");
  }
  local_of_vertex_.assign(mesh_.NumVertices(), -1);
  if (q.IsZero())
  {
    return;
  }
  std::vector<char> touched(mesh_.NumVertices(), 0);
  struct Raw
  {
    int t, q;
    double wq;
  };
  std::vector<Raw> raw;
  for (int t = 0; t < mesh_.NumTriangles(); t++)
  {
    const auto &tri = mesh_.triangles[t];
    if (q.support_box)
    {
      const Box &b = *q.support_box;
      double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300;
      for (int a = 0; a < 3; a++)
      {
        const Point &p = mesh_.vertices[tri[a]];
        lo1 = std::min(lo1, p.x1);
        hi1 = std::max(hi1, p.x1);
        lo2 = std::min(lo2, p.x2);
        hi2 = std::max(hi2, p.x2);
      }
      if (hi1 < b.x1_min || lo1 > b.x1_max || hi2 < b.x2_min || lo2 > b.x2_max)
      {
        continue;
      }
    }
    for (int qp = 0; qp < 3; qp++)
    {
      const int i = 3 * t + qp;
      const double val = q(quad_.points[i].x1, quad_.points[i].x2);
      if (val != 0.0)
      {
        raw.push_back({t, qp, quad_.weights[i] * val});
        for (int a = 0; a < 3; a++)
        {
          if (basis_.dof_of_node[tri[a]] >= 0)
          {
            touched[tri[a]] = 1;
          }
        }
      }
    }
  }
  for (int v = 0; v < mesh_.NumVertices(); v++)
  {
    if (touched[v])
    {
      local_of_vertex_[v] = static_cast<int>(coupling_vertices_.size());
      coupling_vertices_.push_back(v);
    }
  }
  for (const Raw &r : raw)
  {
    const auto &tri = mesh_.triangles[r.t];
    ActivePoint ap;
    ap.x1 = quad_.points[3 * r.t + r.q].x1;
    ap.wq = r.wq;
    ap.q = r.q;
    for (int a = 0; a < 3; a++)
    {
      ap.local[a] = local_of_vertex_[tri[a]];
      ap.dof[a] = basis_.dof_of_node[tri[a]];
    }
    active_.push_back(ap);
  }
}

Vec CoupledSystem::ApplyQ(int l, const Vec &U) const
{
  Vec out = Vec::Zero(basis_.m_prime);
  const cplx a = alpha_[l];
  for (const ActivePoint &ap : active_)
  {
    const double *bary = CellQuadrature::bary[ap.q];
    cplx u = 0.0;
    for (int b = 0; b < 3; b++)
    {
      if (ap.local[b] >= 0)
      {
        u += bary[b] * U[ap.local[b]];
      }
    }
    const cplx val = ap.wq * std::exp(-I * a * ap.x1) * u;
    for (int b = 0; b < 3; b++)
    {
      if (ap.dof[b] >= 0)
      {
        out[ap.dof[b]] += val * bary[b];
      }
    }
  }
  return out;
}

namespace
{

// c exp(i alpha x1) x at the coupling vertices, added into acc.
void AccumulateCoupling(const CellMesh &mesh, const PeriodicBasis &basis,
                        const std::vector<int> &verts, cplx alpha, double c, const Vec &x,
                        Eigen::Ref<Vec> acc)
{
  for (std::size_t i = 0; i < verts.size(); i++)
  {
    const int v = verts[i];
    acc[i] += c * std::exp(I * alpha * mesh.vertices[v].x1) * x[basis.dof_of_node[v]];
  }
}

void AccumulateCells(const CellMesh &mesh, const PeriodicBasis &basis,
                     const std::vector<int> &cells, cplx alpha, double c, const Vec &x,
                     std::vector<Vec> &acc)
{
  for (std::size_t j = 0; j < cells.size(); j++)
  {
    for (int v = 0; v < mesh.NumVertices(); v++)
    {
      const int d = basis.dof_of_node[v];
      if (d >= 0)
      {
        acc[j][v] += c * std::exp(I * alpha * (mesh.vertices[v].x1 + cells[j])) * x[d];
      }
    }
  }
}

}  // namespace

CoupledResult CoupledSystem::Solve(const NodeVector &F, int num_extra, const ExtraVector &G,
                                   const Mat &D, const CoupledOptions &opts) const
{
  const auto start = std::chrono::steady_clock::now();
  const int N = NumNodes();
  const int p = static_cast<int>(coupling_vertices_.size());
  const int ne = p > 0 ? num_extra : 0;
  if (ne > 0 && (D.rows() != ne || D.cols() != p))
  {
    throw Error(ErrorCode::dimension_mismatch, "coupling matrix D must be I x p");
  }
  const double c = 1.0 / (2.0 * pi * N);
  const double k2 = k_ * k_;
  Sweeper sweeper(P_, k_, alpha_, ResolveThreads(opts.threads), opts.cache_bytes);
  const int T = sweeper.NumChunks();
  auto log = [&](const std::string &msg)
  {
    if (opts.verbose)
    {
      const double s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::fprintf(stderr, "[coupled %7.2fs] %s\n", s, msg.c_str());
    }
  };

  CoupledResult res;
  res.stats.coupling_size = p;
  res.stats.unique_factorizations = sweeper.NumGroups();
  res.U = Vec::Zero(p);
  res.C = Vec::Zero(num_extra);

  if (p > 0)
  {
    const bool dense = opts.schur == CoupledOptions::SchurMode::dense ||
                       (opts.schur == CoupledOptions::SchurMode::automatic &&
                        p < opts.dense_threshold);
    res.stats.schur_path = dense ? "dense" : "gmres";
    // Columns: b_U, K_UC (ne), and K_UU (p) on the dense path.
    const int ncol = 1 + ne + (dense ? p : 0);
    std::vector<Mat> part(T, Mat::Zero(p, ncol));
    log("first sweep, " + std::to_string(ncol) + " columns, " + std::to_string(p) +
        " coupling vertices");
    sweeper.Run(
        [&](int l, const NodeSolver &solve, int tid)
        {
          Mat &acc = part[tid];
          AccumulateCoupling(mesh_, basis_, coupling_vertices_, alpha_[l], c, solve(F(l)),
                             acc.col(0));
          for (int m = 0; m < ne; m++)
          {
            AccumulateCoupling(mesh_, basis_, coupling_vertices_, alpha_[l], c, solve(G(l, m)),
                               acc.col(1 + m));
          }
          if (dense)
          {
            Vec e = Vec::Zero(p);
            for (int j = 0; j < p; j++)
            {
              e.setZero();
              e[j] = 1.0;
              const Vec rhs = k2 * dalpha_[l] * ApplyQ(l, e);
              AccumulateCoupling(mesh_, basis_, coupling_vertices_, alpha_[l], c, solve(rhs),
                                 acc.col(1 + ne + j));
            }
          }
        });
    Mat K = Mat::Zero(p, ncol);
    for (const Mat &m : part)
    {
      K += m;
    }
    const Vec bU = K.col(0);
    const Mat KUC = K.middleCols(1, ne);
    if (dense)
    {
      Mat S = Mat::Identity(p, p) - K.rightCols(p);
      if (ne > 0)
      {
        S -= KUC * D;
      }
      Eigen::PartialPivLU<Mat> lu(S);
      res.stats.schur_rcond = lu.rcond();
      if (!(res.stats.schur_rcond >= opts.trapped_rcond))
      {
        throw Error(ErrorCode::trapped_mode,
                    "coupled system is singular (Schur reciprocal condition " +
                        std::to_string(res.stats.schur_rcond) +
                        "); the perturbation supports a trapped mode");
      }
      res.U = lu.solve(bU);
    }
    else
    {
      LinearMap op = [&](const Vec &u, Vec &out)
      {
        std::vector<Vec> acc(T, Vec::Zero(p));
        sweeper.Run(
            [&](int l, const NodeSolver &solve, int tid)
            {
              const Vec rhs = k2 * dalpha_[l] * ApplyQ(l, u);
              AccumulateCoupling(mesh_, basis_, coupling_vertices_, alpha_[l], c, solve(rhs),
                                 acc[tid]);
            });
        out = u;
        for (const Vec &a : acc)
        {
          out -= a;
        }
        if (ne > 0)
        {
          out -= KUC * (D * u);
        }
        log("gmres matvec, sweep " + std::to_string(sweeper.sweeps));
      };
      const GmresResult g = Gmres(op, bU, bU, opts.gmres_tol, opts.gmres_max_iter);
      res.stats.gmres_iterations = g.iterations;
      res.stats.gmres_residual = g.relative_residual;
      res.stats.schur_rcond = g.sigma_max > 0.0 ? g.sigma_min / g.sigma_max : 0.0;
      if (res.stats.schur_rcond < opts.trapped_rcond)
      {
        throw Error(ErrorCode::trapped_mode,
                    "coupled system is numerically singular (Krylov condition estimate " +
                        std::to_string(res.stats.schur_rcond) +
                        "); the perturbation supports a trapped mode");
      }
      if (!g.converged)
      {
        throw Error(ErrorCode::no_convergence,
                    "GMRES on the coupled system stalled at relative residual " +
                        std::to_string(g.relative_residual) + " after " +
                        std::to_string(g.iterations) + " iterations");
      }
      res.U = g.x;
    }
    if (ne > 0)
    {
      res.C = D * res.U;
    }
  }
  else
  {
    res.stats.schur_path = "none";
  }

  // Final sweep: node solutions, fields on the requested cells, optional Bloch field.
  log("final sweep");
  const int nv = mesh_.NumVertices();
  std::vector<std::vector<Vec>> cell_acc(
      T, std::vector<Vec>(opts.cells.size(), Vec::Zero(nv)));
  std::vector<double> resid(N, 0.0);
  if (opts.keep_bloch_field)
  {
    res.bloch = BlochField{Mat::Zero(N, basis_.m_prime)};
  }
  sweeper.Run(
      [&](int l, const NodeSolver &solve, int tid)
      {
        Vec rhs = F(l);
        if (p > 0)
        {
          rhs += k2 * dalpha_[l] * ApplyQ(l, res.U);
          for (int m = 0; m < ne; m++)
          {
            rhs += res.C[m] * G(l, m);
          }
        }
        const Vec x = solve(rhs);
        const double rn = rhs.norm();
        const SpMat A = P_.Evaluate(alpha_[l], k_);
        resid[l] = rn > 0.0 ? (A * x - rhs).norm() / rn : 0.0;
        AccumulateCells(mesh_, basis_, opts.cells, alpha_[l], c, x, cell_acc[tid]);
        if (res.bloch)
        {
          res.bloch->coeffs.row(l) = x.transpose();
        }
      });
  for (std::size_t j = 0; j < opts.cells.size(); j++)
  {
    FieldOnCell u;
    u.cell_index = opts.cells[j];
    u.values = Vec::Zero(nv);
    for (int t = 0; t < T; t++)
    {
      u.values += cell_acc[t][j];
    }
    res.fields.push_back(std::move(u));
  }
  res.stats.max_cell_residual = *std::max_element(resid.begin(), resid.end());
  res.stats.sweeps = sweeper.sweeps;
  res.stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log("done");
  return res;
}

CoupledResult CoupledSystem::SolveMonolithic(const NodeVector &F, int num_extra,
                                             const ExtraVector &G, const Mat &D,
                                             const std::vector<int> &cells) const
{
  const auto start = std::chrono::steady_clock::now();
  const int N = NumNodes();
  const int M = basis_.m_prime;
  const int p = static_cast<int>(coupling_vertices_.size());
  const int ne = p > 0 ? num_extra : 0;
  if (ne > 0 && (D.rows() != ne || D.cols() != p))
  {
    throw Error(ErrorCode::dimension_mismatch, "coupling matrix D must be I x p");
  }
  const double c = 1.0 / (2.0 * pi * N);
  const double k2 = k_ * k_;
  const long n_total = static_cast<long>(N) * M + p + ne;
  if (n_total > 2000000000L)
  {
    throw Error(ErrorCode::invalid_argument, "monolithic system too large");
  }
  const int off_U = N * M, off_C = N * M + p;
  std::vector<Eigen::Triplet<cplx>> trip;
  Vec rhs = Vec::Zero(n_total);
  for (int l = 0; l < N; l++)
  {
    const int off = l * M;
    const SpMat A = P_.Evaluate(alpha_[l], k_);
    for (int j = 0; j < A.outerSize(); j++)
    {
      for (SpMat::InnerIterator it(A, j); it; ++it)
      {
        trip.emplace_back(off + it.row(), off + it.col(), it.value());
      }
    }
    const cplx s = -k2 * dalpha_[l];
    for (const ActivePoint &ap : active_)
    {
      const double *bary = CellQuadrature::bary[ap.q];
      const cplx val = s * ap.wq * std::exp(-I * alpha_[l] * ap.x1);
      for (int a = 0; a < 3; a++)
      {
        for (int b = 0; b < 3; b++)
        {
          if (ap.dof[a] >= 0 && ap.local[b] >= 0)
          {
            trip.emplace_back(off + ap.dof[a], off_U + ap.local[b], val * bary[a] * bary[b]);
          }
        }
      }
    }
    for (int m = 0; m < ne; m++)
    {
      const Vec g = G(l, m);
      for (int i = 0; i < M; i++)
      {
        if (g[i] != 0.0)
        {
          trip.emplace_back(off + i, off_C + m, -g[i]);
        }
      }
    }
    rhs.segment(off, M) = F(l);
    for (int i = 0; i < p; i++)
    {
      const int v = coupling_vertices_[i];
      trip.emplace_back(off_U + i, off + basis_.dof_of_node[v],
                        -c * std::exp(I * alpha_[l] * mesh_.vertices[v].x1));
    }
  }
  for (int i = 0; i < p; i++)
  {
    trip.emplace_back(off_U + i, off_U + i, 1.0);
  }
  for (int m = 0; m < ne; m++)
  {
    trip.emplace_back(off_C + m, off_C + m, 1.0);
    for (int j = 0; j < p; j++)
    {
      trip.emplace_back(off_C + m, off_U + j, -D(m, j));
    }
  }
  SpMat K(n_total, n_total);
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();
  SparseLU lu;
  lu.Factor(K);
  const Vec x = lu.Solve(rhs);

  CoupledResult res;
  res.U = x.segment(off_U, p);
  res.C = Vec::Zero(num_extra);
  if (ne > 0)
  {
    res.C.head(ne) = x.segment(off_C, ne);
  }
  res.bloch = BlochField{Mat::Zero(N, M)};
  std::vector<Vec> acc(cells.size(), Vec::Zero(mesh_.NumVertices()));
  for (int l = 0; l < N; l++)
  {
    const Vec xl = x.segment(static_cast<long>(l) * M, M);
    res.bloch->coeffs.row(l) = xl.transpose();
    AccumulateCells(mesh_, basis_, cells, alpha_[l], c, xl, acc);
  }
  for (std::size_t j = 0; j < cells.size(); j++)
  {
    res.fields.push_back(FieldOnCell{cells[j], acc[j]});
  }
  res.stats.coupling_size = p;
  res.stats.schur_path = "monolithic";
  res.stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace lapwave
