#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nbt {

using VertexId = std::int32_t;
using EdgeId = std::int64_t;

/// Immutable simple undirected graph with a canonical directed-edge index.
///
/// Adjacency is CSR-like: neighbor lists are sorted and flattened, so each
/// directed edge u->v gets the id of its slot in the flattened array. The
/// reverse edge v->u is reachable in O(1) through a precomputed table.
class Graph {
 public:
  Graph() = default;

  /// Build from a list of undirected edges on vertices 0..n-1.
  /// Rejects self-loops and duplicates.
  Graph(VertexId n, std::vector<std::pair<VertexId, VertexId>> edges) : n_(n) {
    for (auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n || v >= n)
        throw std::invalid_argument("Graph: vertex id out of range");
      if (u == v)
        throw std::invalid_argument("Graph: self-loop at vertex " + std::to_string(u));
      if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
      throw std::invalid_argument("Graph: duplicate edge");
    m_ = static_cast<EdgeId>(edges.size());

    std::vector<EdgeId> deg(static_cast<std::size_t>(n), 0);
    for (auto& [u, v] : edges) {
      ++deg[static_cast<std::size_t>(u)];
      ++deg[static_cast<std::size_t>(v)];
    }
    offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (VertexId v = 0; v < n; ++v)
      offsets_[static_cast<std::size_t>(v) + 1] =
          offsets_[static_cast<std::size_t>(v)] + deg[static_cast<std::size_t>(v)];
    heads_.assign(static_cast<std::size_t>(2 * m_), 0);
    tails_.assign(static_cast<std::size_t>(2 * m_), 0);
    std::vector<EdgeId> cursor(offsets_.begin(), offsets_.end() - 1);
    for (auto& [u, v] : edges) {
      heads_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(u)])] = v;
      tails_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(u)]++)] = u;
      heads_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(v)])] = u;
      tails_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(v)]++)] = v;
    }
    // Neighbor lists come out sorted because the edge list is sorted by (u,v)
    // for the u side; the v side needs a per-vertex sort.
    for (VertexId v = 0; v < n; ++v) {
      auto b = heads_.begin() + offsets_[static_cast<std::size_t>(v)];
      auto e = heads_.begin() + offsets_[static_cast<std::size_t>(v) + 1];
      std::sort(b, e);
    }
    reverse_.assign(static_cast<std::size_t>(2 * m_), 0);
    for (EdgeId e = 0; e < 2 * m_; ++e) reverse_[static_cast<std::size_t>(e)] = locate(head(e), tail(e));
  }

  VertexId num_vertices() const { return n_; }
  EdgeId num_edges() const { return m_; }
  EdgeId num_directed_edges() const { return 2 * m_; }

  EdgeId degree(VertexId v) const {
    return offsets_[static_cast<std::size_t>(v) + 1] - offsets_[static_cast<std::size_t>(v)];
  }

  /// Sorted neighbors of v.
  const VertexId* neighbors_begin(VertexId v) const {
    return heads_.data() + offsets_[static_cast<std::size_t>(v)];
  }
  const VertexId* neighbors_end(VertexId v) const {
    return heads_.data() + offsets_[static_cast<std::size_t>(v) + 1];
  }

  /// First outgoing directed-edge id of v; ids of v's out-edges are contiguous.
  EdgeId out_begin(VertexId v) const { return offsets_[static_cast<std::size_t>(v)]; }
  EdgeId out_end(VertexId v) const { return offsets_[static_cast<std::size_t>(v) + 1]; }

  VertexId tail(EdgeId e) const { return tails_[static_cast<std::size_t>(e)]; }
  VertexId head(EdgeId e) const { return heads_[static_cast<std::size_t>(e)]; }
  EdgeId reverse(EdgeId e) const { return reverse_[static_cast<std::size_t>(e)]; }

  bool has_edge(VertexId u, VertexId v) const {
    auto b = neighbors_begin(u);
    auto e = neighbors_end(u);
    return std::binary_search(b, e, v);
  }

  /// Directed-edge id of u->v; u and v must be adjacent.
  EdgeId locate(VertexId u, VertexId v) const {
    auto b = neighbors_begin(u);
    auto e = neighbors_end(u);
    auto it = std::lower_bound(b, e, v);
    if (it == e || *it != v) throw std::invalid_argument("Graph: no such edge");
    return offsets_[static_cast<std::size_t>(u)] + (it - b);
  }

  /// Undirected edges sorted by (min(u,v), max(u,v)).
  std::vector<std::pair<VertexId, VertexId>> edge_list() const {
    std::vector<std::pair<VertexId, VertexId>> out;
    out.reserve(static_cast<std::size_t>(m_));
    for (VertexId u = 0; u < n_; ++u)
      for (auto it = neighbors_begin(u); it != neighbors_end(u); ++it)
        if (u < *it) out.emplace_back(u, *it);
    return out;
  }

 private:
  VertexId n_ = 0;
  EdgeId m_ = 0;
  std::vector<EdgeId> offsets_;
  std::vector<VertexId> heads_;  // head of each directed edge, grouped by tail
  std::vector<VertexId> tails_;
  std::vector<EdgeId> reverse_;
};

/// Graph plus a planted per-vertex group label in {0..q-1}.
struct LabeledGraph {
  Graph graph;
  std::vector<int> labels;
  int q = 0;

  void validate() const {
    if (labels.size() != static_cast<std::size_t>(graph.num_vertices()))
      throw std::invalid_argument("LabeledGraph: labels length != n");
    for (int g : labels)
      if (g < 0 || g >= q) throw std::invalid_argument("LabeledGraph: label out of range");
  }
};

/// (mean degree, branching ratio <k^2>/<k> - 1).
inline std::pair<double, double> degree_stats(const Graph& g) {
  if (g.num_edges() < 1) throw std::invalid_argument("degree_stats: empty graph");
  double sum_d = 0.0, sum_d2 = 0.0;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    double d = static_cast<double>(g.degree(v));
    sum_d += d;
    sum_d2 += d * d;
  }
  double mean = sum_d / static_cast<double>(g.num_vertices());
  return {mean, sum_d2 / sum_d - 1.0};
}

enum class ComponentKind { tree, unicyclic, multicyclic };

struct Component {
  ComponentKind kind;
  VertexId vertices;
  EdgeId edges;
};

/// Classify connected components: tree iff e = v-1, unicyclic iff e = v.
inline std::vector<Component> component_census(const Graph& g) {
  std::vector<int> comp(static_cast<std::size_t>(g.num_vertices()), -1);
  std::vector<Component> out;
  std::vector<VertexId> stack;
  for (VertexId s = 0; s < g.num_vertices(); ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    int id = static_cast<int>(out.size());
    VertexId nv = 0;
    EdgeId ne = 0;
    stack.push_back(s);
    comp[static_cast<std::size_t>(s)] = id;
    while (!stack.empty()) {
      VertexId v = stack.back();
      stack.pop_back();
      ++nv;
      ne += g.degree(v);
      for (auto it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it) {
        if (comp[static_cast<std::size_t>(*it)] < 0) {
          comp[static_cast<std::size_t>(*it)] = id;
          stack.push_back(*it);
        }
      }
    }
    ne /= 2;
    ComponentKind k = ne == nv - 1 ? ComponentKind::tree
                    : ne == nv     ? ComponentKind::unicyclic
                                   : ComponentKind::multicyclic;
    out.push_back({k, nv, ne});
  }
  return out;
}

}  // namespace nbt
