#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "nbt/graph.hpp"
#include "nbt/rng.hpp"

namespace nbt {

/// Stochastic block model parameters: edge probability between groups a,b
/// is affinity[a][b] / n.
struct SbmParams {
  VertexId n = 0;
  int q = 1;
  std::vector<double> group_fracs;           // size q, sums to 1
  std::vector<std::vector<double>> affinity; // q x q, symmetric, >= 0

  /// Two-value special case with equal group sizes.
  static SbmParams two_value(VertexId n, int q, double c_in, double c_out) {
    SbmParams p;
    p.n = n;
    p.q = q;
    p.group_fracs.assign(static_cast<std::size_t>(q), 1.0 / q);
    p.affinity.assign(static_cast<std::size_t>(q),
                      std::vector<double>(static_cast<std::size_t>(q), c_out));
    for (int a = 0; a < q; ++a)
      p.affinity[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] = c_in;
    return p;
  }

  void validate() const {
    if (q < 1) throw std::invalid_argument("SbmParams: q must be >= 1");
    if (group_fracs.size() != static_cast<std::size_t>(q) ||
        affinity.size() != static_cast<std::size_t>(q))
      throw std::invalid_argument("SbmParams: dimension mismatch");
    double sum = 0.0;
    for (double f : group_fracs) {
      if (f < 0.0) throw std::invalid_argument("SbmParams: negative group fraction");
      sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("SbmParams: group fractions must sum to 1");
    for (int a = 0; a < q; ++a) {
      if (affinity[static_cast<std::size_t>(a)].size() != static_cast<std::size_t>(q))
        throw std::invalid_argument("SbmParams: affinity not q x q");
      for (int b = 0; b < q; ++b) {
        double cab = affinity[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        if (cab < 0.0) throw std::invalid_argument("SbmParams: negative affinity");
        if (std::abs(cab - affinity[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)]) > 1e-12)
          throw std::invalid_argument("SbmParams: affinity not symmetric");
        if (cab > static_cast<double>(n))
          throw std::invalid_argument("SbmParams: affinity entry exceeds n (probability > 1)");
      }
    }
  }

  /// Expected degree of a vertex in group a.
  double group_degree(int a) const {
    double c = 0.0;
    for (int b = 0; b < q; ++b)
      c += affinity[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] *
           group_fracs[static_cast<std::size_t>(b)];
    return c;
  }

  double mean_degree() const {
    double c = 0.0;
    for (int a = 0; a < q; ++a) c += group_fracs[static_cast<std::size_t>(a)] * group_degree(a);
    return c;
  }
};

/// Sample a labeled SBM graph. Block-wise binomial edge counts (O(m)), with
/// self-loop/duplicate proposals rejected and resampled.
inline LabeledGraph sbm_sample(const SbmParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  const VertexId n = params.n;
  const int q = params.q;

  // Multinomial label assignment.
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::vector<std::vector<VertexId>> groups(static_cast<std::size_t>(q));
  std::vector<double> cdf(static_cast<std::size_t>(q));
  std::partial_sum(params.group_fracs.begin(), params.group_fracs.end(), cdf.begin());
  for (VertexId v = 0; v < n; ++v) {
    double u = rng.uniform();
    int a = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (a >= q) a = q - 1;
    labels[static_cast<std::size_t>(v)] = a;
    groups[static_cast<std::size_t>(a)].push_back(v);
  }

  std::vector<std::pair<VertexId, VertexId>> edges;
  std::unordered_set<std::uint64_t> seen;
  auto key = [](VertexId u, VertexId v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
           static_cast<std::uint32_t>(v);
  };
  for (int a = 0; a < q; ++a) {
    for (int b = a; b < q; ++b) {
      const auto& ga = groups[static_cast<std::size_t>(a)];
      const auto& gb = groups[static_cast<std::size_t>(b)];
      if (ga.empty() || gb.empty()) continue;
      double p = params.affinity[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] /
                 static_cast<double>(n);
      std::int64_t pairs =
          a == b ? static_cast<std::int64_t>(ga.size()) * (static_cast<std::int64_t>(ga.size()) - 1) / 2
                 : static_cast<std::int64_t>(ga.size()) * static_cast<std::int64_t>(gb.size());
      std::int64_t count = rng.binomial(pairs, p);
      for (std::int64_t i = 0; i < count; ++i) {
        for (int attempt = 0;; ++attempt) {
          if (attempt > 1000)
            throw std::runtime_error("sbm_sample: could not place edge without collision");
          VertexId u = ga[static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(ga.size())))];
          VertexId v = gb[static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(gb.size())))];
          if (u == v) continue;
          if (!seen.insert(key(u, v)).second) continue;
          edges.emplace_back(u, v);
          break;
        }
      }
    }
  }

  LabeledGraph lg{Graph(n, std::move(edges)), std::move(labels), q};
  lg.validate();
  return lg;
}

/// Configuration-model parameters for two equal groups with a shared
/// degree distribution. tilde_c_in + tilde_c_out must equal twice the
/// distribution's branching ratio (the per-edge branching splits evenly
/// into within-group and between-group halves).
struct DegreeSeqParams {
  std::vector<std::pair<int, double>> degree_dist; // (k, a_k), sum a_k = 1
  double tilde_c_in = 0.0;
  double tilde_c_out = 0.0;
  VertexId n = 0;

  double mean_degree() const {
    double s = 0.0;
    for (auto [k, a] : degree_dist) s += k * a;
    return s;
  }

  double branching_ratio() const {
    double s1 = 0.0, s2 = 0.0;
    for (auto [k, a] : degree_dist) {
      s1 += k * a;
      s2 += static_cast<double>(k) * k * a;
    }
    if (s1 <= 0.0) throw std::invalid_argument("DegreeSeqParams: zero mean degree");
    return s2 / s1 - 1.0;
  }

  void validate() const {
    if (n < 2) throw std::invalid_argument("DegreeSeqParams: n too small");
    if (tilde_c_in < 0.0 || tilde_c_out < 0.0)
      throw std::invalid_argument("DegreeSeqParams: negative branching target");
    double mass = 0.0;
    for (auto [k, a] : degree_dist) {
      if (k < 0 || a < 0.0) throw std::invalid_argument("DegreeSeqParams: bad degree atom");
      mass += a;
    }
    if (std::abs(mass - 1.0) > 1e-12)
      throw std::invalid_argument("DegreeSeqParams: degree distribution must sum to 1");
    double tc = branching_ratio();
    double sum = tilde_c_in + tilde_c_out;
    if (tc > 0.0 && std::abs(sum - 2.0 * tc) > 0.02 * 2.0 * tc)
      throw std::invalid_argument(
          "DegreeSeqParams: tilde_c_in + tilde_c_out inconsistent with branching ratio");
  }
};

/// Half-edge matching with a planted bipartition: each half-edge is typed
/// within-group with probability tilde_c_in/(tilde_c_in+tilde_c_out),
/// between-group otherwise. Multi-edges and self-loops are removed by
/// partner-swapping rewires; failure after bounded retries is an error.
inline LabeledGraph config_model_sample(const DegreeSeqParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  const VertexId n = params.n;
  const VertexId half = n / 2;

  // Degrees sampled iid from the distribution.
  std::vector<double> cdf(params.degree_dist.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < params.degree_dist.size(); ++i) {
    acc += params.degree_dist[i].second;
    cdf[i] = acc;
  }
  auto draw_degree = [&]() {
    double u = rng.uniform();
    std::size_t i = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (i >= cdf.size()) i = cdf.size() - 1;
    return params.degree_dist[i].first;
  };
  std::vector<int> deg(static_cast<std::size_t>(n));
  std::int64_t total = 0;
  for (VertexId v = 0; v < n; ++v) {
    deg[static_cast<std::size_t>(v)] = draw_degree();
    total += deg[static_cast<std::size_t>(v)];
  }
  {
    bool all_odd = true;
    for (auto [k, a] : params.degree_dist)
      if (a > 0.0 && k % 2 == 0) all_odd = false;
    if (total % 2 != 0) {
      if (all_odd)
        throw std::invalid_argument("config_model_sample: odd total half-edge count");
      for (int tries = 0; total % 2 != 0; ++tries) {
        if (tries > 10000)
          throw std::runtime_error("config_model_sample: could not fix half-edge parity");
        VertexId v = static_cast<VertexId>(rng.below(n));
        total -= deg[static_cast<std::size_t>(v)];
        deg[static_cast<std::size_t>(v)] = draw_degree();
        total += deg[static_cast<std::size_t>(v)];
      }
    }
  }

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (VertexId v = 0; v < n; ++v) labels[static_cast<std::size_t>(v)] = v < half ? 0 : 1;

  // Type each half-edge, then balance so the two between-lists match and the
  // within-lists are pairable.
  double denom = params.tilde_c_in + params.tilde_c_out;
  double p_within = denom > 0.0 ? params.tilde_c_in / denom : 1.0;
  std::vector<VertexId> within[2], between[2];
  for (VertexId v = 0; v < n; ++v) {
    int g = labels[static_cast<std::size_t>(v)];
    for (int i = 0; i < deg[static_cast<std::size_t>(v)]; ++i) {
      if (rng.uniform() < p_within)
        within[g].push_back(v);
      else
        between[g].push_back(v);
    }
  }
  auto move_one = [&](std::vector<VertexId>& from, std::vector<VertexId>& to) {
    if (from.empty()) throw std::runtime_error("config_model_sample: cannot balance half-edges");
    std::size_t i = static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(from.size())));
    to.push_back(from[i]);
    from[i] = from.back();
    from.pop_back();
  };
  while (between[0].size() != between[1].size()) {
    int big = between[0].size() > between[1].size() ? 0 : 1;
    move_one(between[big], within[big]);
  }
  for (int g = 0; g < 2; ++g) {
    if (within[g].size() % 2 != 0) {
      // Parity must shift by one in each group simultaneously.
      if (within[1 - g].size() % 2 != 0) {
        move_one(within[0], between[0]);
        move_one(within[1], between[1]);
      } else {
        // Total is even, so both within-lists have the same parity.
        throw std::runtime_error("config_model_sample: parity bookkeeping failed");
      }
    }
  }

  for (int g = 0; g < 2; ++g) {
    rng.shuffle(within[g]);
    rng.shuffle(between[g]);
  }
  std::vector<std::pair<VertexId, VertexId>> pairs;
  for (int g = 0; g < 2; ++g)
    for (std::size_t i = 0; i + 1 < within[g].size(); i += 2)
      pairs.emplace_back(within[g][i], within[g][i + 1]);
  for (std::size_t i = 0; i < between[0].size(); ++i)
    pairs.emplace_back(between[0][i], between[1][i]);

  // Rewire bad pairs (self-loops / duplicates) by swapping partners with a
  // random other pair; group types are preserved so the planted structure
  // is unaffected.
  auto canon = [](VertexId u, VertexId v) {
    return u < v ? std::make_pair(u, v) : std::make_pair(v, u);
  };
  std::map<std::pair<VertexId, VertexId>, int> count;
  for (auto& pr : pairs) ++count[canon(pr.first, pr.second)];
  auto is_bad = [&](std::size_t i) {
    return pairs[i].first == pairs[i].second || count[canon(pairs[i].first, pairs[i].second)] > 1;
  };
  std::int64_t budget = 200 * static_cast<std::int64_t>(pairs.size()) + 1000;
  for (int pass = 0; pass < 100; ++pass) {
    bool any_bad = false;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      while (is_bad(i)) {
        any_bad = true;
        if (--budget < 0) throw std::runtime_error("config_model_sample: rewiring failed");
        std::size_t j = static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(pairs.size())));
        if (j == i) continue;
        if (labels[static_cast<std::size_t>(pairs[i].second)] !=
            labels[static_cast<std::size_t>(pairs[j].second)])
          continue;
        --count[canon(pairs[i].first, pairs[i].second)];
        --count[canon(pairs[j].first, pairs[j].second)];
        std::swap(pairs[i].second, pairs[j].second);
        ++count[canon(pairs[i].first, pairs[i].second)];
        ++count[canon(pairs[j].first, pairs[j].second)];
      }
    }
    if (!any_bad) break;  // swaps at j < i can re-dirty earlier pairs
  }
  std::vector<std::pair<VertexId, VertexId>> edges;
  edges.reserve(pairs.size());
  for (auto& pr : pairs) {
    auto c = canon(pr.first, pr.second);
    if (pr.first == pr.second || count[c] != 1)
      throw std::runtime_error("config_model_sample: rewiring left a bad pair");
    edges.push_back(c);
  }

  LabeledGraph lg{Graph(n, std::move(edges)), std::move(labels), 2};
  lg.validate();
  return lg;
}

}  // namespace nbt
