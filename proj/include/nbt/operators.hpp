#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "nbt/dense_matrix.hpp"
#include "nbt/graph.hpp"

namespace nbt {

enum class OperatorKind {
  b_edge,
  b_prime,
  adjacency,
  laplacian,
  random_walk,
  modularity,
  weighted_b,
};

inline std::string to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::b_edge: return "b_edge";
    case OperatorKind::b_prime: return "b_prime";
    case OperatorKind::adjacency: return "adjacency";
    case OperatorKind::laplacian: return "laplacian";
    case OperatorKind::random_walk: return "random_walk";
    case OperatorKind::modularity: return "modularity";
    case OperatorKind::weighted_b: return "weighted_b";
  }
  throw std::invalid_argument("unknown operator kind");
}

/// Matrix-free linear operator: apply and apply_transpose over a fixed
/// dimension. Handles are immutable and safe to share.
class OperatorHandle {
 public:
  using ApplyFn = std::function<void(const double*, double*)>;

  OperatorHandle() = default;
  OperatorHandle(std::size_t dim, OperatorKind kind, ApplyFn apply, ApplyFn apply_transpose)
      : dim_(dim), kind_(kind), apply_(std::move(apply)), apply_t_(std::move(apply_transpose)) {}

  std::size_t dim() const { return dim_; }
  OperatorKind kind() const { return kind_; }

  void apply(const double* x, double* y) const { apply_(x, y); }
  void apply_transpose(const double* x, double* y) const { apply_t_(x, y); }

  std::vector<double> apply(const std::vector<double>& x) const {
    check(x);
    std::vector<double> y(dim_);
    apply_(x.data(), y.data());
    return y;
  }

  std::vector<double> apply_transpose(const std::vector<double>& x) const {
    check(x);
    std::vector<double> y(dim_);
    apply_t_(x.data(), y.data());
    return y;
  }

  /// Same operator with apply and apply_transpose swapped.
  OperatorHandle transposed() const { return OperatorHandle(dim_, kind_, apply_t_, apply_); }

 private:
  void check(const std::vector<double>& x) const {
    if (x.size() != dim_) throw std::invalid_argument("OperatorHandle: dimension mismatch");
  }

  std::size_t dim_ = 0;
  OperatorKind kind_ = OperatorKind::adjacency;
  ApplyFn apply_;
  ApplyFn apply_t_;
};

/// Non-backtracking operator B on the 2m directed edges:
/// (B x)_{u->v} = sum_{x in N(v) \ {u}} x_{v->x}.
/// O(m) per apply: per-vertex outgoing sums minus the reverse-edge term.
inline OperatorHandle build_b(const Graph& g) {
  auto gp = std::make_shared<Graph>(g);
  std::size_t dim = static_cast<std::size_t>(g.num_directed_edges());
  auto fwd = [gp](const double* x, double* y) {
    const Graph& gr = *gp;
    const VertexId n = gr.num_vertices();
    std::vector<double> out_sum(static_cast<std::size_t>(n), 0.0);
    for (VertexId v = 0; v < n; ++v)
      for (EdgeId e = gr.out_begin(v); e < gr.out_end(v); ++e)
        out_sum[static_cast<std::size_t>(v)] += x[e];
    for (EdgeId e = 0; e < gr.num_directed_edges(); ++e)
      y[e] = out_sum[static_cast<std::size_t>(gr.head(e))] - x[gr.reverse(e)];
  };
  auto bwd = [gp](const double* x, double* y) {
    // (B^T y)_{w->x} = sum over incoming edges of w, excluding x->w.
    const Graph& gr = *gp;
    const VertexId n = gr.num_vertices();
    std::vector<double> in_sum(static_cast<std::size_t>(n), 0.0);
    for (EdgeId e = 0; e < gr.num_directed_edges(); ++e)
      in_sum[static_cast<std::size_t>(gr.head(e))] += x[e];
    for (EdgeId e = 0; e < gr.num_directed_edges(); ++e)
      y[e] = in_sum[static_cast<std::size_t>(gr.tail(e))] - x[gr.reverse(e)];
  };
  return OperatorHandle(dim, OperatorKind::b_edge, fwd, bwd);
}

/// Vertex-pair reduction B' = [[0, D-I], [-I, A]] of dimension 2n. Its
/// spectrum is B's spectrum minus the +-1 eigenvalues of multiplicity m-n.
/// Left eigenvectors have the form (f, -mu f); compute them as right
/// eigenvectors of the transpose.
inline OperatorHandle build_b_prime(const Graph& g) {
  auto gp = std::make_shared<Graph>(g);
  const std::size_t n = static_cast<std::size_t>(g.num_vertices());
  auto fwd = [gp, n](const double* x, double* y) {
    const Graph& gr = *gp;
    const double* x1 = x;
    const double* x2 = x + n;
    for (std::size_t v = 0; v < n; ++v)
      y[v] = (static_cast<double>(gr.degree(static_cast<VertexId>(v))) - 1.0) * x2[v];
    for (std::size_t v = 0; v < n; ++v) {
      double s = -x1[v];
      for (auto it = gr.neighbors_begin(static_cast<VertexId>(v));
           it != gr.neighbors_end(static_cast<VertexId>(v)); ++it)
        s += x2[static_cast<std::size_t>(*it)];
      y[n + v] = s;
    }
  };
  auto bwd = [gp, n](const double* x, double* y) {
    // B'^T = [[0, -I], [D-I, A]].
    const Graph& gr = *gp;
    const double* x1 = x;
    const double* x2 = x + n;
    for (std::size_t v = 0; v < n; ++v) y[v] = -x2[v];
    for (std::size_t v = 0; v < n; ++v) {
      double s = (static_cast<double>(gr.degree(static_cast<VertexId>(v))) - 1.0) * x1[v];
      for (auto it = gr.neighbors_begin(static_cast<VertexId>(v));
           it != gr.neighbors_end(static_cast<VertexId>(v)); ++it)
        s += x2[static_cast<std::size_t>(*it)];
      y[n + v] = s;
    }
  };
  return OperatorHandle(2 * n, OperatorKind::b_prime, fwd, bwd);
}

/// Classical comparison operators: A, L = D - A, Q_uv = A_uv / d_u, and
/// M_uv = A_uv - d_u d_v / (2m) (applied with the rank-one trick).
inline OperatorHandle classical_operator(const Graph& g, OperatorKind kind) {
  auto gp = std::make_shared<Graph>(g);
  const std::size_t n = static_cast<std::size_t>(g.num_vertices());
  auto adj_apply = [gp, n](const double* x, double* y) {
    const Graph& gr = *gp;
    for (std::size_t v = 0; v < n; ++v) {
      double s = 0.0;
      for (auto it = gr.neighbors_begin(static_cast<VertexId>(v));
           it != gr.neighbors_end(static_cast<VertexId>(v)); ++it)
        s += x[static_cast<std::size_t>(*it)];
      y[v] = s;
    }
  };
  switch (kind) {
    case OperatorKind::adjacency:
      return OperatorHandle(n, kind, adj_apply, adj_apply);
    case OperatorKind::laplacian: {
      auto apply = [gp, n, adj_apply](const double* x, double* y) {
        const Graph& gr = *gp;
        adj_apply(x, y);
        for (std::size_t v = 0; v < n; ++v)
          y[v] = static_cast<double>(gr.degree(static_cast<VertexId>(v))) * x[v] - y[v];
      };
      return OperatorHandle(n, kind, apply, apply);
    }
    case OperatorKind::random_walk: {
      for (VertexId v = 0; v < g.num_vertices(); ++v)
        if (g.degree(v) == 0)
          throw std::invalid_argument("classical_operator: random_walk needs no isolated vertices"
                                      " (vertex " + std::to_string(v) + " has degree 0)");
      auto fwd = [gp, n, adj_apply](const double* x, double* y) {
        const Graph& gr = *gp;
        adj_apply(x, y);
        for (std::size_t v = 0; v < n; ++v)
          y[v] /= static_cast<double>(gr.degree(static_cast<VertexId>(v)));
      };
      auto bwd = [gp, n, adj_apply](const double* x, double* y) {
        const Graph& gr = *gp;
        std::vector<double> scaled(n);
        for (std::size_t v = 0; v < n; ++v)
          scaled[v] = x[v] / static_cast<double>(gr.degree(static_cast<VertexId>(v)));
        adj_apply(scaled.data(), y);
      };
      return OperatorHandle(n, kind, fwd, bwd);
    }
    case OperatorKind::modularity: {
      if (g.num_edges() == 0)
        throw std::invalid_argument("classical_operator: modularity needs at least one edge");
      auto apply = [gp, n, adj_apply](const double* x, double* y) {
        const Graph& gr = *gp;
        adj_apply(x, y);
        double dot = 0.0;
        for (std::size_t v = 0; v < n; ++v)
          dot += static_cast<double>(gr.degree(static_cast<VertexId>(v))) * x[v];
        dot /= 2.0 * static_cast<double>(gr.num_edges());
        for (std::size_t v = 0; v < n; ++v)
          y[v] -= static_cast<double>(gr.degree(static_cast<VertexId>(v))) * dot;
      };
      return OperatorHandle(n, kind, apply, apply);
    }
    default:
      throw std::invalid_argument("classical_operator: kind must be adjacency/laplacian/"
                                  "random_walk/modularity");
  }
}

/// Weighted non-backtracking operator: entry s(u,v) in place of 1, i.e.
/// row u->v of the unweighted B scaled by s(u,v). Weights are stored per
/// undirected edge and applied symmetrically.
inline OperatorHandle build_weighted_b(const Graph& g, const std::vector<double>& edge_weights) {
  if (edge_weights.size() != static_cast<std::size_t>(g.num_edges()))
    throw std::invalid_argument("build_weighted_b: need one weight per undirected edge");
  auto gp = std::make_shared<Graph>(g);
  // Expand to per-directed-edge weights, symmetric by construction.
  auto wp = std::make_shared<std::vector<double>>(static_cast<std::size_t>(g.num_directed_edges()));
  {
    auto edges = g.edge_list();
    for (std::size_t i = 0; i < edges.size(); ++i) {
      EdgeId e = g.locate(edges[i].first, edges[i].second);
      (*wp)[static_cast<std::size_t>(e)] = edge_weights[i];
      (*wp)[static_cast<std::size_t>(g.reverse(e))] = edge_weights[i];
    }
  }
  std::size_t dim = static_cast<std::size_t>(g.num_directed_edges());
  OperatorHandle b0 = build_b(g);
  auto fwd = [b0, wp, dim](const double* x, double* y) {
    b0.apply(x, y);
    for (std::size_t e = 0; e < dim; ++e) y[e] *= (*wp)[e];
  };
  auto bwd = [b0, wp, dim](const double* x, double* y) {
    std::vector<double> scaled(dim);
    for (std::size_t e = 0; e < dim; ++e) scaled[e] = (*wp)[e] * x[e];
    b0.apply_transpose(scaled.data(), y);
  };
  return OperatorHandle(dim, OperatorKind::weighted_b, fwd, bwd);
}

/// Materialize an operator as a dense matrix (oracle use only).
inline Matrix materialize(const OperatorHandle& op) {
  if (op.dim() > 5000) throw std::invalid_argument("materialize: dimension exceeds 5000");
  const std::size_t d = op.dim();
  Matrix m(d, d);
  std::vector<double> e(d, 0.0), col(d);
  for (std::size_t j = 0; j < d; ++j) {
    e[j] = 1.0;
    op.apply(e.data(), col.data());
    for (std::size_t i = 0; i < d; ++i) m(i, j) = col[i];
    e[j] = 0.0;
  }
  return m;
}

/// Wigner semicircle density with variance c: P(x) = sqrt(4c - x^2) / (2 pi c).
inline double semicircle_density(double x, double c) {
  double disc = 4.0 * c - x * x;
  return disc <= 0.0 ? 0.0 : std::sqrt(disc) / (2.0 * 3.14159265358979323846 * c);
}

}  // namespace nbt
