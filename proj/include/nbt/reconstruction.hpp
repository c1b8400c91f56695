#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nbt/graph.hpp"

namespace nbt {

/// Distance-r label sums scaled by mu^-r: the approximate community
/// eigenvector of B and its vertex-space counterpart.
struct ReconstructionVector {
  int radius = 0;
  double mu = 0.0;
  std::vector<double> vertex_values;  // f^(r), one per vertex
  std::vector<double> edge_values;    // g^(r), one per directed edge
  double correlation = 0.0;           // <f^(r), sigma> / n
  bool beyond_diameter = false;       // r reached past every component
};

/// f^(r)_v = mu^-r sum of sigma_u over vertices at graph distance exactly r;
/// g^(r)_e likewise over directed edges at non-backtracking distance r, with
/// sigma read at the head of the reached edge.
inline ReconstructionVector reconstruction_vector(const LabeledGraph& lg, int r, double mu) {
  lg.validate();
  if (lg.q != 2) throw std::invalid_argument("reconstruction_vector: requires q = 2");
  if (r < 0) throw std::invalid_argument("reconstruction_vector: radius must be >= 0");
  if (mu == 0.0) throw std::invalid_argument("reconstruction_vector: mu must be nonzero");
  const Graph& g = lg.graph;
  const std::size_t n = static_cast<std::size_t>(g.num_vertices());
  const std::size_t de = static_cast<std::size_t>(g.num_directed_edges());
  std::vector<double> sigma(n);
  for (std::size_t v = 0; v < n; ++v) sigma[v] = lg.labels[v] == 0 ? 1.0 : -1.0;

  ReconstructionVector out;
  out.radius = r;
  out.mu = mu;
  out.vertex_values.assign(n, 0.0);
  out.edge_values.assign(de, 0.0);
  const double scale = std::pow(mu, -r);

  // Vertex-space BFS, one source at a time, epoch-stamped visited marks.
  {
    std::vector<int> stamp(n, -1);
    std::vector<VertexId> frontier, next;
    bool any_reached = false;
    for (VertexId s = 0; s < g.num_vertices(); ++s) {
      frontier.assign(1, s);
      stamp[static_cast<std::size_t>(s)] = static_cast<int>(s);
      for (int depth = 0; depth < r && !frontier.empty(); ++depth) {
        next.clear();
        for (VertexId v : frontier)
          for (auto it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it)
            if (stamp[static_cast<std::size_t>(*it)] != static_cast<int>(s)) {
              stamp[static_cast<std::size_t>(*it)] = static_cast<int>(s);
              next.push_back(*it);
            }
        frontier.swap(next);
      }
      double sum = 0.0;
      for (VertexId v : frontier) sum += sigma[static_cast<std::size_t>(v)];
      if (!frontier.empty()) any_reached = true;
      out.vertex_values[static_cast<std::size_t>(s)] = scale * sum;
    }
    out.beyond_diameter = !any_reached && r > 0;
  }

  // Directed-edge BFS in the non-backtracking edge graph.
  {
    std::vector<EdgeId> stamp(de, -1);
    std::vector<EdgeId> frontier, next;
    for (EdgeId s = 0; s < g.num_directed_edges(); ++s) {
      frontier.assign(1, s);
      stamp[static_cast<std::size_t>(s)] = s;
      for (int depth = 0; depth < r && !frontier.empty(); ++depth) {
        next.clear();
        for (EdgeId e : frontier) {
          VertexId v = g.head(e);
          EdgeId rev = g.reverse(e);
          for (EdgeId e2 = g.out_begin(v); e2 < g.out_end(v); ++e2) {
            if (e2 == rev) continue;
            if (stamp[static_cast<std::size_t>(e2)] != s) {
              stamp[static_cast<std::size_t>(e2)] = s;
              next.push_back(e2);
            }
          }
        }
        frontier.swap(next);
      }
      double sum = 0.0;
      for (EdgeId e : frontier) sum += sigma[static_cast<std::size_t>(g.head(e))];
      out.edge_values[static_cast<std::size_t>(s)] = scale * sum;
    }
  }

  double corr = 0.0;
  for (std::size_t v = 0; v < n; ++v) corr += out.vertex_values[v] * sigma[v];
  out.correlation = n > 0 ? corr / static_cast<double>(n) : 0.0;
  return out;
}

}  // namespace nbt
