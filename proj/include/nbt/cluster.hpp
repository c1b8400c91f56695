#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nbt/eigen.hpp"
#include "nbt/graph.hpp"
#include "nbt/rng.hpp"

namespace nbt {

/// Per-vertex coordinates built from community-correlated eigenvectors,
/// one column per eigenvector, columns unit-normalized.
struct VertexEmbedding {
  std::size_t n = 0;
  int cols = 0;
  std::vector<double> points;  // row-major n x cols

  double& at(std::size_t v, int c) { return points[v * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]; }
  double at(std::size_t v, int c) const { return points[v * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]; }
};

struct Labeling {
  std::vector<int> labels;
  int q = 0;
};

enum class EmbeddingSource { edge_space, vertex_space };

namespace detail {

/// Collapse one eigenvector to per-vertex values. edge_space: sum the
/// eigenvector over the incoming edges of each vertex. vertex_space: read f
/// from the first n coordinates of the (f, -mu f) left-eigenvector layout.
inline std::vector<double> vertex_values(const Graph& g, const std::vector<double>& vec,
                                         EmbeddingSource source) {
  const std::size_t n = static_cast<std::size_t>(g.num_vertices());
  std::vector<double> f(n, 0.0);
  if (source == EmbeddingSource::edge_space) {
    if (vec.size() != static_cast<std::size_t>(g.num_directed_edges()))
      throw std::invalid_argument("embed: edge_space vector must have dim 2m");
    for (EdgeId e = 0; e < g.num_directed_edges(); ++e)
      f[static_cast<std::size_t>(g.head(e))] += vec[static_cast<std::size_t>(e)];
  } else {
    if (vec.size() != 2 * n)
      throw std::invalid_argument("embed: vertex_space vector must have dim 2n");
    std::copy(vec.begin(), vec.begin() + static_cast<std::ptrdiff_t>(n), f.begin());
  }
  return f;
}

inline VertexEmbedding embedding_from_columns(const std::vector<std::vector<double>>& columns,
                                              std::size_t n) {
  VertexEmbedding emb;
  emb.n = n;
  emb.cols = static_cast<int>(columns.size());
  emb.points.assign(n * columns.size(), 0.0);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    double norm = 0.0;
    for (double x : columns[c]) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t v = 0; v < n; ++v)
      emb.at(v, static_cast<int>(c)) = norm > 0.0 ? columns[c][v] / norm : 0.0;
  }
  return emb;
}

}  // namespace detail

/// Build a vertex embedding from the first `count` real converged eigenpairs
/// after skipping `skip_leading` of them (the leading eigenvalue carries no
/// community signal). Complex pairs in the way are an error.
inline VertexEmbedding embed(const Graph& g, const EigenResult& eig, EmbeddingSource source,
                             int count, int skip_leading = 1) {
  if (count < 1) throw std::invalid_argument("embed: count must be >= 1");
  std::vector<std::vector<double>> columns;
  std::vector<std::complex<double>> rejected;
  int skipped = 0;
  for (std::size_t i = 0; i < eig.values.size() && static_cast<int>(columns.size()) < count; ++i) {
    if (i < eig.vectors.size() && !eig.converged.empty() && !eig.converged[i]) continue;
    const auto& vec = eig.vectors.at(i);
    double vnorm = 0.0, inorm = 0.0;
    for (auto& c : vec) {
      vnorm += std::norm(c);
      inorm += c.imag() * c.imag();
    }
    bool real_vec = std::sqrt(inorm) <= 1e-6 * std::sqrt(vnorm) &&
                    std::abs(eig.values[i].imag()) <= 1e-6 * std::max(1.0, std::abs(eig.values[i]));
    if (!real_vec) {
      rejected.push_back(eig.values[i]);
      continue;
    }
    if (skipped < skip_leading) {
      ++skipped;
      continue;
    }
    std::vector<double> re(vec.size());
    for (std::size_t t = 0; t < vec.size(); ++t) re[t] = vec[t].real();
    columns.push_back(detail::vertex_values(g, re, source));
  }
  if (static_cast<int>(columns.size()) < count) {
    std::ostringstream msg;
    msg << "embed: only " << columns.size() << " real converged eigenvectors available, need "
        << count;
    if (!rejected.empty()) {
      msg << "; complex eigenvalues encountered:";
      for (auto v : rejected) msg << " (" << v.real() << "," << v.imag() << ")";
    }
    throw std::runtime_error(msg.str());
  }
  return detail::embedding_from_columns(columns, static_cast<std::size_t>(g.num_vertices()));
}

/// q=2 labels from the sign of a one-column embedding; exact zeros get
/// label 0 for determinism.
inline Labeling sign_labels(const VertexEmbedding& emb) {
  if (emb.cols != 1) throw std::invalid_argument("sign_labels: embedding must have one column");
  Labeling lab;
  lab.q = 2;
  lab.labels.resize(emb.n);
  for (std::size_t v = 0; v < emb.n; ++v) lab.labels[v] = emb.at(v, 0) < 0.0 ? 1 : 0;
  return lab;
}

/// Lloyd k-means with k-means++ seeding; best of `restarts` by objective.
/// Deterministic given seed.
inline Labeling kmeans(const VertexEmbedding& emb, int q, std::uint64_t seed, int restarts = 10) {
  if (q < 2) throw std::invalid_argument("kmeans: q must be >= 2");
  const std::size_t n = emb.n;
  const int d = emb.cols;
  if (n < static_cast<std::size_t>(q)) throw std::invalid_argument("kmeans: fewer points than q");
  {
    std::set<std::vector<double>> distinct;
    for (std::size_t v = 0; v < n && distinct.size() < static_cast<std::size_t>(q); ++v) {
      std::vector<double> row(static_cast<std::size_t>(d));
      for (int c = 0; c < d; ++c) row[static_cast<std::size_t>(c)] = emb.at(v, c);
      distinct.insert(std::move(row));
    }
    if (distinct.size() < static_cast<std::size_t>(q))
      throw std::invalid_argument("kmeans: fewer distinct points than q");
  }

  auto dist2 = [&](std::size_t v, const std::vector<double>& center) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      double diff = emb.at(v, c) - center[static_cast<std::size_t>(c)];
      s += diff * diff;
    }
    return s;
  };

  Labeling best;
  best.q = q;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < restarts; ++restart) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
    // k-means++ seeding.
    std::vector<std::vector<double>> centers;
    std::vector<double> mind2(n, std::numeric_limits<double>::infinity());
    std::size_t first = static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(n)));
    centers.push_back([&] {
      std::vector<double> c(static_cast<std::size_t>(d));
      for (int j = 0; j < d; ++j) c[static_cast<std::size_t>(j)] = emb.at(first, j);
      return c;
    }());
    while (static_cast<int>(centers.size()) < q) {
      double total = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        mind2[v] = std::min(mind2[v], dist2(v, centers.back()));
        total += mind2[v];
      }
      std::size_t pick = 0;
      if (total > 0.0) {
        double r = rng.uniform() * total;
        double acc = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
          acc += mind2[v];
          if (acc >= r) {
            pick = v;
            break;
          }
        }
      } else {
        pick = static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(n)));
      }
      std::vector<double> c(static_cast<std::size_t>(d));
      for (int j = 0; j < d; ++j) c[static_cast<std::size_t>(j)] = emb.at(pick, j);
      centers.push_back(std::move(c));
    }

    std::vector<int> assign(n, 0);
    double prev_obj = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 300; ++it) {
      double obj = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        double bestd = std::numeric_limits<double>::infinity();
        int bestc = 0;
        for (int c = 0; c < q; ++c) {
          double s = dist2(v, centers[static_cast<std::size_t>(c)]);
          if (s < bestd) {
            bestd = s;
            bestc = c;
          }
        }
        assign[v] = bestc;
        obj += bestd;
      }
      if (obj > prev_obj * (1.0 + 1e-12))
        throw std::logic_error("kmeans: objective increased across a Lloyd iteration");
      bool done = prev_obj - obj < 1e-10 * std::max(prev_obj, 1e-300) ||
                  (std::isfinite(prev_obj) && prev_obj == obj);
      prev_obj = obj;
      // Update step.
      std::vector<std::vector<double>> sums(static_cast<std::size_t>(q),
                                            std::vector<double>(static_cast<std::size_t>(d), 0.0));
      std::vector<std::size_t> counts(static_cast<std::size_t>(q), 0);
      for (std::size_t v = 0; v < n; ++v) {
        ++counts[static_cast<std::size_t>(assign[v])];
        for (int c = 0; c < d; ++c)
          sums[static_cast<std::size_t>(assign[v])][static_cast<std::size_t>(c)] += emb.at(v, c);
      }
      for (int c = 0; c < q; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
          // Re-seed an empty cluster at the farthest point.
          std::size_t far = 0;
          double fard = -1.0;
          for (std::size_t v = 0; v < n; ++v) {
            double s = dist2(v, centers[static_cast<std::size_t>(assign[v])]);
            if (s > fard) {
              fard = s;
              far = v;
            }
          }
          for (int j = 0; j < d; ++j)
            centers[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] = emb.at(far, j);
          done = false;
          continue;
        }
        for (int j = 0; j < d; ++j)
          centers[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] =
              sums[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] /
              static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
      if (done) break;
    }
    if (prev_obj < best_obj) {
      best_obj = prev_obj;
      best.labels = assign;
    }
  }
  return best;
}

namespace detail {

/// Max-weight assignment on a q x q score matrix (Hungarian, O(q^3)).
inline std::vector<int> max_assignment(const std::vector<std::vector<double>>& score) {
  const int q = static_cast<int>(score.size());
  double maxv = 0.0;
  for (auto& row : score)
    for (double v : row) maxv = std::max(maxv, v);
  // Convert to min-cost with padding-free square matrix; 1-indexed potentials.
  std::vector<std::vector<double>> cost(static_cast<std::size_t>(q),
                                        std::vector<double>(static_cast<std::size_t>(q)));
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          maxv - score[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  std::vector<double> u(static_cast<std::size_t>(q) + 1, 0.0), v(static_cast<std::size_t>(q) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(q) + 1, 0), way(static_cast<std::size_t>(q) + 1, 0);
  for (int i = 1; i <= q; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(q) + 1,
                             std::numeric_limits<double>::infinity());
    std::vector<char> used(static_cast<std::size_t>(q) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      int i0 = p[static_cast<std::size_t>(j0)], j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= q; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                     u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= q; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> match(static_cast<std::size_t>(q), -1);  // match[row] = column
  for (int j = 1; j <= q; ++j) match[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return match;
}

}  // namespace detail

/// Overlap between a ground-truth and an inferred labeling: agreement under
/// the best group permutation, normalized so chance is 0 and perfect is 1.
/// Exhaustive over permutations for q <= 8, optimal assignment beyond.
inline double overlap(const Labeling& truth, const Labeling& pred) {
  if (truth.labels.size() != pred.labels.size())
    throw std::invalid_argument("overlap: labelings differ in size");
  if (truth.q != pred.q) throw std::invalid_argument("overlap: labelings differ in q");
  const int q = truth.q;
  const std::size_t n = truth.labels.size();
  if (n == 0 || q < 2) throw std::invalid_argument("overlap: need n >= 1 and q >= 2");
  // confusion[a][b] = #vertices with truth a, pred b.
  std::vector<std::vector<double>> confusion(static_cast<std::size_t>(q),
                                             std::vector<double>(static_cast<std::size_t>(q), 0.0));
  for (std::size_t v = 0; v < n; ++v)
    confusion[static_cast<std::size_t>(truth.labels[v])][static_cast<std::size_t>(pred.labels[v])] +=
        1.0;
  double best = 0.0;
  if (q <= 8) {
    std::vector<int> perm(static_cast<std::size_t>(q));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double agree = 0.0;
      for (int b = 0; b < q; ++b)
        agree += confusion[static_cast<std::size_t>(perm[static_cast<std::size_t>(b)])]
                          [static_cast<std::size_t>(b)];
      best = std::max(best, agree);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    // score[pred b][truth a]
    std::vector<std::vector<double>> score(static_cast<std::size_t>(q),
                                           std::vector<double>(static_cast<std::size_t>(q)));
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b)
        score[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] =
            confusion[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    auto match = detail::max_assignment(score);
    double agree = 0.0;
    for (int b = 0; b < q; ++b)
      agree += confusion[static_cast<std::size_t>(match[static_cast<std::size_t>(b)])]
                        [static_cast<std::size_t>(b)];
    best = agree;
  }
  double frac = best / static_cast<double>(n);
  return (frac - 1.0 / q) / (1.0 - 1.0 / q);
}

}  // namespace nbt
