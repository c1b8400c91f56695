#pragma once

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nbt/graph.hpp"

namespace nbt {

namespace detail {

inline long parse_vertex_token(const std::string& tok, const std::string& path, int line_no) {
  for (char c : tok)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": non-integer vertex token '" + tok + "'");
  return std::stol(tok);
}

struct ParsedEdgeList {
  std::vector<std::pair<VertexId, VertexId>> edges;
  std::vector<double> weights;  // parallel to edges; empty if no weight column
  VertexId max_id = -1;
};

inline ParsedEdgeList parse_edge_list(const std::string& path, bool want_weights) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  ParsedEdgeList out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ss(line);
    std::string tu, tv;
    if (!(ss >> tu >> tv))
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 'u v'");
    long u = parse_vertex_token(tu, path, line_no);
    long v = parse_vertex_token(tv, path, line_no);
    if (u == v)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": self-loop '" + line + "'");
    double w = 1.0;
    if (want_weights) {
      std::string tw;
      if (ss >> tw) {
        try {
          std::size_t pos = 0;
          w = std::stod(tw, &pos);
          if (pos != tw.size()) throw std::invalid_argument(tw);
        } catch (const std::exception&) {
          throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad weight '" + tw + "'");
        }
      }
    }
    out.edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
    out.weights.push_back(w);
    out.max_id = std::max({out.max_id, static_cast<VertexId>(u), static_cast<VertexId>(v)});
  }
  // Duplicate detection with line attribution, before Graph canonicalizes.
  std::vector<std::pair<std::pair<VertexId, VertexId>, std::size_t>> keyed;
  keyed.reserve(out.edges.size());
  for (std::size_t i = 0; i < out.edges.size(); ++i) {
    auto [u, v] = out.edges[i];
    keyed.push_back({{std::min(u, v), std::max(u, v)}, i});
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 1; i < keyed.size(); ++i)
    if (keyed[i].first == keyed[i - 1].first)
      throw std::runtime_error(path + ": duplicate edge " + std::to_string(keyed[i].first.first) +
                               " " + std::to_string(keyed[i].first.second) +
                               " (undirected canonicalization)");
  return out;
}

}  // namespace detail

/// Load "u v" lines ('#' comments allowed). Vertices are 0..max_id, so
/// isolated vertices below the max id are preserved.
inline Graph load_edge_list(const std::string& path) {
  auto parsed = detail::parse_edge_list(path, false);
  return Graph(parsed.max_id + 1, std::move(parsed.edges));
}

struct WeightedGraph {
  Graph graph;
  std::vector<double> edge_weights;  // one per undirected edge, ordered by (u,v)
};

/// Load "u v w" lines; a missing third column defaults the weight to 1.
inline WeightedGraph load_weighted_edge_list(const std::string& path) {
  auto parsed = detail::parse_edge_list(path, true);
  // Reorder weights to the canonical (u,v)-sorted edge order used by Graph.
  std::vector<std::pair<std::pair<VertexId, VertexId>, double>> keyed;
  keyed.reserve(parsed.edges.size());
  for (std::size_t i = 0; i < parsed.edges.size(); ++i) {
    auto [u, v] = parsed.edges[i];
    keyed.push_back({{std::min(u, v), std::max(u, v)}, parsed.weights[i]});
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<double> weights;
  weights.reserve(keyed.size());
  for (auto& kv : keyed) weights.push_back(kv.second);
  return {Graph(parsed.max_id + 1, std::move(parsed.edges)), std::move(weights)};
}

/// Write edges sorted by (u, v), one "u v" line each.
inline void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write edge list: " + path);
  for (auto& [u, v] : g.edge_list()) out << u << " " << v << "\n";
}

/// Labels file: line i holds the group id of vertex i.
inline void save_labels(const std::vector<int>& labels, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write labels: " + path);
  for (int g : labels) out << g << "\n";
}

inline std::vector<int> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open labels: " + path);
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      labels.push_back(std::stoi(line));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad label '" + line + "'");
    }
  }
  return labels;
}

}  // namespace nbt
