#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nbt/cluster.hpp"
#include "nbt/dense_matrix.hpp"
#include "nbt/generate.hpp"
#include "nbt/graph.hpp"
#include "nbt/operators.hpp"
#include "nbt/prediction.hpp"
#include "nbt/rng.hpp"

namespace nbt {

/// Per-directed-edge messages on the q-simplex plus the global external
/// fields h_a that stand in for non-neighbor interactions.
struct BpState {
  std::vector<double> messages;  // 2m x q, row e = eta_{tail(e) -> head(e)}
  std::vector<double> fields;    // h_a, recomputed once per sweep
  int q = 0;

  double message(EdgeId e, int a) const {
    return messages[static_cast<std::size_t>(e) * static_cast<std::size_t>(q) +
                    static_cast<std::size_t>(a)];
  }
};

struct BpOpts {
  int max_sweeps = 500;
  double tol = 1e-6;       // max absolute message change per sweep
  double damping = 0.0;    // in [0, 1)
  std::uint64_t seed = 1;
};

struct BpResult {
  std::vector<double> marginals;  // n x q
  Labeling labeling;
  bool converged = false;
  int sweeps = 0;
  BpState state;
};

namespace detail {

/// One message update in log space: log eta_{v->w}^a up to a shared
/// constant, from v's incoming messages other than the one from w.
inline void bp_message_update(const Graph& g, const SbmParams& params,
                              const std::vector<double>& messages, const std::vector<double>& h,
                              EdgeId edge_vw, std::vector<double>& log_out) {
  const int q = params.q;
  const VertexId v = g.tail(edge_vw);
  const VertexId w = g.head(edge_vw);
  for (int a = 0; a < q; ++a)
    log_out[static_cast<std::size_t>(a)] =
        std::log(std::max(params.group_fracs[static_cast<std::size_t>(a)], 1e-300)) -
        h[static_cast<std::size_t>(a)];
  for (EdgeId out = g.out_begin(v); out < g.out_end(v); ++out) {
    VertexId u = g.head(out);
    if (u == w) continue;
    EdgeId in = g.reverse(out);  // u -> v
    for (int a = 0; a < q; ++a) {
      double s = 0.0;
      for (int b = 0; b < q; ++b)
        s += params.affinity[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] *
             messages[static_cast<std::size_t>(in) * static_cast<std::size_t>(q) +
                      static_cast<std::size_t>(b)];
      log_out[static_cast<std::size_t>(a)] += std::log(std::max(s, 1e-300));
    }
  }
}

inline void normalize_from_log(std::vector<double>& log_vals, double* out, int q) {
  double mx = log_vals[0];
  for (int a = 1; a < q; ++a) mx = std::max(mx, log_vals[static_cast<std::size_t>(a)]);
  double z = 0.0;
  for (int a = 0; a < q; ++a) {
    out[a] = std::exp(log_vals[static_cast<std::size_t>(a)] - mx);
    z += out[a];
  }
  for (int a = 0; a < q; ++a) out[a] /= z;
}

inline void bp_marginals(const Graph& g, const SbmParams& params,
                         const std::vector<double>& messages, const std::vector<double>& h,
                         std::vector<double>& marginals) {
  const int q = params.q;
  const std::size_t n = static_cast<std::size_t>(g.num_vertices());
  std::vector<double> log_m(static_cast<std::size_t>(q));
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    for (int a = 0; a < q; ++a)
      log_m[static_cast<std::size_t>(a)] =
          std::log(std::max(params.group_fracs[static_cast<std::size_t>(a)], 1e-300)) -
          h[static_cast<std::size_t>(a)];
    for (EdgeId out = g.out_begin(v); out < g.out_end(v); ++out) {
      EdgeId in = g.reverse(out);
      for (int a = 0; a < q; ++a) {
        double s = 0.0;
        for (int b = 0; b < q; ++b)
          s += params.affinity[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] *
               messages[static_cast<std::size_t>(in) * static_cast<std::size_t>(q) +
                        static_cast<std::size_t>(b)];
        log_m[static_cast<std::size_t>(a)] += std::log(std::max(s, 1e-300));
      }
    }
    normalize_from_log(log_m, marginals.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(q), q);
  }
  (void)n;
}

/// h_a = (1/n) sum_u sum_b c_ab * marginal_u^b.
inline void bp_fields(const SbmParams& params, const std::vector<double>& marginals,
                      std::vector<double>& h) {
  const int q = params.q;
  const std::size_t n = marginals.size() / static_cast<std::size_t>(q);
  std::vector<double> mean(static_cast<std::size_t>(q), 0.0);
  for (std::size_t v = 0; v < n; ++v)
    for (int b = 0; b < q; ++b)
      mean[static_cast<std::size_t>(b)] +=
          marginals[v * static_cast<std::size_t>(q) + static_cast<std::size_t>(b)];
  for (int b = 0; b < q; ++b) mean[static_cast<std::size_t>(b)] /= static_cast<double>(n);
  for (int a = 0; a < q; ++a) {
    double s = 0.0;
    for (int b = 0; b < q; ++b)
      s += params.affinity[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] *
           mean[static_cast<std::size_t>(b)];
    h[static_cast<std::size_t>(a)] = s;
  }
}

}  // namespace detail

/// Belief propagation for the block model. Messages start at the group
/// fractions plus seeded noise; updates are asynchronous in a seeded random
/// edge order, with the fields h recomputed once per sweep.
inline BpResult bp_run(const Graph& g, const SbmParams& params, const BpOpts& opts) {
  params.validate();
  const int q = params.q;
  const std::size_t n = static_cast<std::size_t>(g.num_vertices());
  const std::size_t de = static_cast<std::size_t>(g.num_directed_edges());
  if (opts.tol <= 0.0) throw std::invalid_argument("bp_run: tol must be positive");
  if (opts.damping < 0.0 || opts.damping >= 1.0)
    throw std::invalid_argument("bp_run: damping must be in [0, 1)");
  Rng rng(opts.seed);

  BpResult res;
  res.state.q = q;
  res.state.messages.assign(de * static_cast<std::size_t>(q), 0.0);
  res.state.fields.assign(static_cast<std::size_t>(q), 0.0);
  res.marginals.assign(n * static_cast<std::size_t>(q), 0.0);
  auto& msg = res.state.messages;
  for (std::size_t e = 0; e < de; ++e) {
    double z = 0.0;
    for (int a = 0; a < q; ++a) {
      double v = params.group_fracs[static_cast<std::size_t>(a)] + 1e-3 * rng.uniform();
      msg[e * static_cast<std::size_t>(q) + static_cast<std::size_t>(a)] = v;
      z += v;
    }
    for (int a = 0; a < q; ++a) msg[e * static_cast<std::size_t>(q) + static_cast<std::size_t>(a)] /= z;
  }
  detail::bp_marginals(g, params, msg, res.state.fields, res.marginals);
  detail::bp_fields(params, res.marginals, res.state.fields);

  std::vector<EdgeId> order(de);
  for (std::size_t e = 0; e < de; ++e) order[e] = static_cast<EdgeId>(e);
  std::vector<double> log_new(static_cast<std::size_t>(q)), fresh(static_cast<std::size_t>(q));
  std::vector<double> log_m(static_cast<std::size_t>(q)), new_marg(static_cast<std::size_t>(q));

  // Refreshes the marginal of one vertex from its current incoming messages
  // and folds the change into the fields immediately. A field that lags a
  // full sweep behind the marginals makes the uniform-magnetization mode
  // oscillate instead of relaxing, so the feedback has to be immediate.
  auto refresh_vertex = [&](VertexId v) {
    for (int a = 0; a < q; ++a)
      log_m[static_cast<std::size_t>(a)] =
          std::log(std::max(params.group_fracs[static_cast<std::size_t>(a)], 1e-300)) -
          res.state.fields[static_cast<std::size_t>(a)];
    for (EdgeId out = g.out_begin(v); out < g.out_end(v); ++out) {
      EdgeId in = g.reverse(out);
      for (int a = 0; a < q; ++a) {
        double s = 0.0;
        for (int b = 0; b < q; ++b)
          s += params.affinity[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] *
               msg[static_cast<std::size_t>(in) * static_cast<std::size_t>(q) +
                   static_cast<std::size_t>(b)];
        log_m[static_cast<std::size_t>(a)] += std::log(std::max(s, 1e-300));
      }
    }
    detail::normalize_from_log(log_m, new_marg.data(), q);
    double* old_marg = res.marginals.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(q);
    for (int a = 0; a < q; ++a) {
      double delta = 0.0;
      for (int b = 0; b < q; ++b)
        delta += params.affinity[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] *
                 (new_marg[static_cast<std::size_t>(b)] - old_marg[b]);
      res.state.fields[static_cast<std::size_t>(a)] += delta / static_cast<double>(n);
    }
    for (int a = 0; a < q; ++a) old_marg[a] = new_marg[static_cast<std::size_t>(a)];
  };

  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    rng.shuffle(order);
    double max_change = 0.0;
    for (EdgeId e : order) {
      detail::bp_message_update(g, params, msg, res.state.fields, e, log_new);
      detail::normalize_from_log(log_new, fresh.data(), q);
      double* slot = msg.data() + static_cast<std::size_t>(e) * static_cast<std::size_t>(q);
      for (int a = 0; a < q; ++a) {
        double updated = (1.0 - opts.damping) * fresh[static_cast<std::size_t>(a)] +
                         opts.damping * slot[a];
        max_change = std::max(max_change, std::abs(updated - slot[a]));
        slot[a] = updated;
      }
      refresh_vertex(g.head(e));
    }
    detail::bp_marginals(g, params, msg, res.state.fields, res.marginals);
    detail::bp_fields(params, res.marginals, res.state.fields);
    res.sweeps = sweep;
    if (max_change < opts.tol) {
      res.converged = true;
      break;
    }
  }

  res.labeling.q = q;
  res.labeling.labels.assign(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    int best = 0;
    double bestv = res.marginals[v * static_cast<std::size_t>(q)];
    for (int a = 1; a < q; ++a) {
      double m = res.marginals[v * static_cast<std::size_t>(q) + static_cast<std::size_t>(a)];
      if (m > bestv) {
        bestv = m;
        best = a;
      }
    }
    res.labeling.labels[v] = best;
  }
  return res;
}

/// Finite-difference Jacobian of the q=2 message-update map at the trivial
/// fixed point (fields frozen), compared entrywise against
/// (c_in - c_out)/(c_in + c_out) * B. Small graphs only (2m <= 400).
inline double linearization_check(const Graph& g, const SbmParams& params) {
  params.validate();
  if (params.q != 2) throw std::invalid_argument("linearization_check: requires q = 2");
  if (std::abs(params.group_fracs[0] - 0.5) > 1e-12)
    throw std::invalid_argument("linearization_check: requires equal groups");
  const std::size_t de = static_cast<std::size_t>(g.num_directed_edges());
  if (de > 400) throw std::invalid_argument("linearization_check: graph too large (2m > 400)");
  const double c_in = params.affinity[0][0];
  const double c_out = params.affinity[0][1];
  const double alpha = (c_in + c_out) > 0.0 ? (c_in - c_out) / (c_in + c_out) : 0.0;

  // Fields at the trivial fixed point; uniform across groups for equal
  // group degrees, so they drop out of normalized messages.
  std::vector<double> h(2);
  {
    std::vector<double> marg(static_cast<std::size_t>(g.num_vertices()) * 2, 0.5);
    detail::bp_fields(params, marg, h);
  }

  // Synchronous one-step map in the delta = eta^+ - 1/2 parametrization.
  auto step = [&](const std::vector<double>& delta) {
    std::vector<double> messages(de * 2);
    for (std::size_t e = 0; e < de; ++e) {
      messages[e * 2] = 0.5 + delta[e];
      messages[e * 2 + 1] = 0.5 - delta[e];
    }
    std::vector<double> out(de);
    std::vector<double> log_new(2), fresh(2);
    for (EdgeId e = 0; e < g.num_directed_edges(); ++e) {
      detail::bp_message_update(g, params, messages, h, e, log_new);
      detail::normalize_from_log(log_new, fresh.data(), 2);
      out[static_cast<std::size_t>(e)] = fresh[0] - 0.5;
    }
    return out;
  };

  const double fd_step = 1e-5;
  Matrix jac_t(de, de);  // row e' = d out / d delta_{e'}, i.e. J^T
  std::vector<double> delta(de, 0.0);
  for (std::size_t ep = 0; ep < de; ++ep) {
    delta[ep] = fd_step;
    auto plus = step(delta);
    delta[ep] = -fd_step;
    auto minus = step(delta);
    delta[ep] = 0.0;
    for (std::size_t e = 0; e < de; ++e)
      jac_t(ep, e) = (plus[e] - minus[e]) / (2.0 * fd_step);
  }

  Matrix b = materialize(build_b(g));
  double dev = 0.0;
  for (std::size_t i = 0; i < de; ++i)
    for (std::size_t j = 0; j < de; ++j)
      dev = std::max(dev, std::abs(jac_t(i, j) - alpha * b(i, j)));
  return dev;
}

/// Linear-stability criterion of the trivial BP fixed point: nu * mu2 > 1,
/// nu the leading eigenvalue of T. Matches the closed-form detectability
/// threshold for equal group sizes.
inline bool stability_criterion(const SbmParams& params, double mu2) {
  auto pred = predict(params);
  double nu = pred.t_eigenvalues.empty() ? 0.0 : pred.t_eigenvalues.front();
  return nu * mu2 > 1.0;
}

}  // namespace nbt
