#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "nbt/graph.hpp"
#include "nbt/rng.hpp"

namespace testutil {

inline nbt::Graph path_graph(int n) {
  std::vector<std::pair<nbt::VertexId, nbt::VertexId>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return nbt::Graph(n, std::move(e));
}

inline nbt::Graph cycle_graph(int n) {
  std::vector<std::pair<nbt::VertexId, nbt::VertexId>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return nbt::Graph(n, std::move(e));
}

inline nbt::Graph complete_graph(int n) {
  std::vector<std::pair<nbt::VertexId, nbt::VertexId>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return nbt::Graph(n, std::move(e));
}

/// Star K_{1,k}: vertex 0 is the center.
inline nbt::Graph star_graph(int k) {
  std::vector<std::pair<nbt::VertexId, nbt::VertexId>> e;
  for (int i = 1; i <= k; ++i) e.emplace_back(0, i);
  return nbt::Graph(k + 1, std::move(e));
}

/// Erdos-Renyi G(n, p).
inline nbt::Graph random_graph(int n, double p, std::uint64_t seed) {
  nbt::Rng rng(seed);
  std::vector<std::pair<nbt::VertexId, nbt::VertexId>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < p) e.emplace_back(i, j);
  return nbt::Graph(n, std::move(e));
}

/// Uniform random attachment tree on n vertices.
inline nbt::Graph random_tree(int n, std::uint64_t seed) {
  nbt::Rng rng(seed);
  std::vector<std::pair<nbt::VertexId, nbt::VertexId>> e;
  for (int v = 1; v < n; ++v) e.emplace_back(static_cast<int>(rng.below(v)), v);
  return nbt::Graph(n, std::move(e));
}

/// Random d-regular graph by pairing-model rejection; n*d must be even.
inline nbt::Graph random_regular(int n, int d, std::uint64_t seed) {
  nbt::Rng rng(seed);
  for (int attempt = 0; attempt < 2000; ++attempt) {
    std::vector<nbt::VertexId> stubs;
    for (int v = 0; v < n; ++v)
      for (int i = 0; i < d; ++i) stubs.push_back(v);
    rng.shuffle(stubs);
    std::vector<std::pair<nbt::VertexId, nbt::VertexId>> e;
    bool ok = true;
    std::vector<std::vector<char>> seen(static_cast<std::size_t>(n),
                                        std::vector<char>(static_cast<std::size_t>(n), 0));
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      int u = stubs[i], v = stubs[i + 1];
      if (u == v || seen[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]) {
        ok = false;
        break;
      }
      seen[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1;
      seen[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1;
      e.emplace_back(u, v);
    }
    if (ok) return nbt::Graph(n, std::move(e));
  }
  throw std::runtime_error("random_regular: rejection sampling failed");
}

/// 2-core: iteratively strip vertices of degree <= 1, relabeling compactly.
/// Returns an empty graph when the core is empty.
inline nbt::Graph two_core(const nbt::Graph& g) {
  std::vector<int> deg(static_cast<std::size_t>(g.num_vertices()));
  std::vector<char> dead(static_cast<std::size_t>(g.num_vertices()), 0);
  for (nbt::VertexId v = 0; v < g.num_vertices(); ++v)
    deg[static_cast<std::size_t>(v)] = static_cast<int>(g.degree(v));
  bool changed = true;
  while (changed) {
    changed = false;
    for (nbt::VertexId v = 0; v < g.num_vertices(); ++v) {
      if (dead[static_cast<std::size_t>(v)] || deg[static_cast<std::size_t>(v)] > 1) continue;
      dead[static_cast<std::size_t>(v)] = 1;
      changed = true;
      for (auto it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it)
        if (!dead[static_cast<std::size_t>(*it)]) --deg[static_cast<std::size_t>(*it)];
    }
  }
  std::vector<nbt::VertexId> remap(static_cast<std::size_t>(g.num_vertices()), -1);
  nbt::VertexId nn = 0;
  for (nbt::VertexId v = 0; v < g.num_vertices(); ++v)
    if (!dead[static_cast<std::size_t>(v)]) remap[static_cast<std::size_t>(v)] = nn++;
  std::vector<std::pair<nbt::VertexId, nbt::VertexId>> edges;
  for (auto& [u, v] : g.edge_list())
    if (!dead[static_cast<std::size_t>(u)] && !dead[static_cast<std::size_t>(v)])
      edges.emplace_back(remap[static_cast<std::size_t>(u)], remap[static_cast<std::size_t>(v)]);
  return nbt::Graph(nn, std::move(edges));
}

/// Multiset match of two complex lists within tol (greedy nearest-neighbor).
inline bool multiset_match(std::vector<std::complex<double>> a,
                           std::vector<std::complex<double>> b, double tol,
                           double* worst = nullptr) {
  if (a.size() != b.size()) return false;
  double w = 0.0;
  std::vector<char> used(b.size(), 0);
  for (auto& x : a) {
    double bestd = 1e300;
    std::size_t bi = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      double d = std::abs(x - b[j]);
      if (d < bestd) {
        bestd = d;
        bi = j;
      }
    }
    used[bi] = 1;
    w = std::max(w, bestd);
  }
  if (worst) *worst = w;
  return w <= tol;
}

}  // namespace testutil
