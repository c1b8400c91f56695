#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <locale>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "nbt/bp.hpp"
#include "nbt/cluster.hpp"
#include "nbt/edgelist_io.hpp"
#include "nbt/eigen.hpp"
#include "nbt/generate.hpp"
#include "nbt/graph.hpp"
#include "nbt/operators.hpp"
#include "nbt/rng.hpp"

namespace nbt {

namespace detail {

/// Shortest round-trip decimal at 17 significant digits, '.' separator.
inline std::string fmt_double(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << x;
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// generate

struct GenerateSummary {
  std::string edges_path;
  std::string labels_path;
  VertexId n = 0;
  EdgeId m = 0;
  double mean_degree = 0.0;
};

/// Sample a block-model graph and write `<out>.edges` + `<out>.labels`.
/// The edge file embeds the full parameter set and seed as '#' comments.
inline GenerateSummary cmd_generate(const SbmParams& params, std::uint64_t seed,
                                    const std::string& out_base) {
  params.validate();
  LabeledGraph lg = sbm_sample(params, seed);
  GenerateSummary s;
  s.edges_path = out_base + ".edges";
  s.labels_path = out_base + ".labels";
  s.n = lg.graph.num_vertices();
  s.m = lg.graph.num_edges();
  s.mean_degree = s.n > 0 ? 2.0 * static_cast<double>(s.m) / static_cast<double>(s.n) : 0.0;

  std::ostringstream os;
  os << "# generator: sbm\n";
  os << "# n: " << params.n << "\n";
  os << "# q: " << params.q << "\n";
  os << "# group_fracs:";
  for (double f : params.group_fracs) os << " " << detail::fmt_double(f);
  os << "\n# affinity:";
  for (auto& row : params.affinity)
    for (double v : row) os << " " << detail::fmt_double(v);
  os << "\n# seed: " << seed << "\n";
  for (auto& e : lg.graph.edge_list()) os << e.first << " " << e.second << "\n";
  detail::write_text_file(s.edges_path, os.str());

  std::ostringstream ls;
  for (int lab : lg.labels) ls << lab << "\n";
  detail::write_text_file(s.labels_path, ls.str());
  return s;
}

// ---------------------------------------------------------------------------
// operators from files

inline OperatorKind parse_operator_kind(const std::string& name) {
  if (name == "b" || name == "nb" || name == "b_edge") return OperatorKind::b_edge;
  if (name == "b_prime") return OperatorKind::b_prime;
  if (name == "adjacency") return OperatorKind::adjacency;
  if (name == "laplacian") return OperatorKind::laplacian;
  if (name == "random_walk") return OperatorKind::random_walk;
  if (name == "modularity") return OperatorKind::modularity;
  throw std::invalid_argument("unknown operator: " + name);
}

inline OperatorHandle operator_for(const Graph& g, OperatorKind kind) {
  switch (kind) {
    case OperatorKind::b_edge:
      return build_b(g);
    case OperatorKind::b_prime:
      return build_b_prime(g);
    case OperatorKind::weighted_b:
      throw std::invalid_argument("weighted operator needs a weighted edge list");
    default:
      return classical_operator(g, kind);
  }
}

// ---------------------------------------------------------------------------
// spectrum

struct SpectrumSummary {
  std::string out_path;
  std::vector<std::complex<double>> values;
  double bulk_radius = 0.0;
  bool bulk_valid = false;
  int real_outside = 0;
};

/// Compute a spectrum (dense oracle or top-k Arnoldi) and write it as a
/// key/value structured-text file with (re, im) eigenvalue rows.
inline SpectrumSummary cmd_spectrum(const std::string& graph_path, OperatorKind kind,
                                    bool dense_mode, int k, std::uint64_t seed,
                                    const std::string& out_path) {
  Graph g = load_edge_list(graph_path);
  OperatorHandle op = operator_for(g, kind);
  EigenResult eig;
  if (dense_mode) {
    if (op.dim() > 5000) throw std::invalid_argument("cmd_spectrum: dense mode requires dim <= 5000");
    eig = dense_spectrum(op, false);
  } else {
    SolverOpts opts;
    opts.k = k;
    opts.seed = seed;
    eig = topk_eigs(op, opts);
    if (!eig.all_converged()) throw std::runtime_error("cmd_spectrum: eigensolver did not converge");
  }

  SpectrumSummary s;
  s.out_path = out_path;
  s.values = eig.values;

  std::ostringstream os;
  os << "format: nbt-spectrum-1\n";
  os << "graph: " << graph_path << "\n";
  os << "operator: " << to_string(kind) << "\n";
  os << "mode: " << (dense_mode ? "dense" : "topk") << "\n";
  if (!dense_mode) os << "k: " << k << "\n";
  os << "seed: " << seed << "\n";
  os << "n: " << g.num_vertices() << "\n";
  os << "m: " << g.num_edges() << "\n";
  os << "dim: " << op.dim() << "\n";
  os << "count: " << eig.values.size() << "\n";
  os << "eigenvalues:\n";
  for (auto v : eig.values)
    os << "  " << detail::fmt_double(v.real()) << " " << detail::fmt_double(v.imag()) << "\n";

  try {
    BulkEstimate est = real_eigs_outside_bulk(eig);
    s.bulk_radius = est.bulk_radius;
    s.bulk_valid = true;
    s.real_outside = est.q_estimate;
    os << "bulk_radius: " << detail::fmt_double(est.bulk_radius) << "\n";
    os << "real_outside_count: " << est.q_estimate << "\n";
    os << "real_outside:\n";
    for (double v : est.real_outside) os << "  " << detail::fmt_double(v) << "\n";
  } catch (const std::exception&) {
    os << "bulk_radius: none\n";
    os << "real_outside_count: none\n";
  }
  if (kind == OperatorKind::adjacency && g.num_vertices() > 0) {
    double c = 2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(g.num_vertices());
    os << "semicircle_mean_degree: " << detail::fmt_double(c) << "\n";
    os << "semicircle_support: " << detail::fmt_double(2.0 * std::sqrt(c)) << "\n";
  }
  detail::write_text_file(out_path, os.str());
  return s;
}

// ---------------------------------------------------------------------------
// clustering pipeline

namespace detail {

inline OperatorHandle shifted_negated(const OperatorHandle& op, double sigma) {
  std::size_t dim = op.dim();
  auto fwd = [op, sigma, dim](const double* x, double* y) {
    op.apply(x, y);
    for (std::size_t i = 0; i < dim; ++i) y[i] = sigma * x[i] - y[i];
  };
  auto bwd = [op, sigma, dim](const double* x, double* y) {
    op.apply_transpose(x, y);
    for (std::size_t i = 0; i < dim; ++i) y[i] = sigma * x[i] - y[i];
  };
  return OperatorHandle(dim, op.kind(), fwd, bwd);
}

/// First `count` real converged eigenvectors after skipping `skip`, as real
/// n-vectors (operator already acts on vertex space). Returns fewer than
/// `count` when the spectrum runs out of real vectors.
inline std::vector<std::vector<double>> real_vertex_columns(const EigenResult& eig,
                                                            std::size_t dim, int skip, int count) {
  std::vector<std::vector<double>> cols;
  int skipped = 0;
  for (std::size_t i = 0; i < eig.values.size() && static_cast<int>(cols.size()) < count; ++i) {
    if (i < eig.converged.size() && !eig.converged[i]) continue;
    if (i >= eig.vectors.size()) break;
    const auto& vec = eig.vectors[i];
    double vnorm = 0.0, inorm = 0.0;
    for (auto& c : vec) {
      vnorm += std::norm(c);
      inorm += c.imag() * c.imag();
    }
    bool real_vec = std::sqrt(inorm) <= 1e-6 * std::sqrt(vnorm) &&
                    std::abs(eig.values[i].imag()) <= 1e-6 * std::max(1.0, std::abs(eig.values[i]));
    if (!real_vec) continue;
    if (skipped < skip) {
      ++skipped;
      continue;
    }
    std::vector<double> re(dim);
    for (std::size_t t = 0; t < dim; ++t) re[t] = vec[t].real();
    cols.push_back(std::move(re));
  }
  return cols;
}

inline Labeling labels_from_embedding(const VertexEmbedding& emb, int q, std::uint64_t seed) {
  if (q == 2 && emb.cols == 1) return sign_labels(emb);
  Labeling lab = kmeans(emb, q, seed);
  return lab;
}

inline Labeling chance_labels(std::size_t n, int q, std::uint64_t seed) {
  Rng rng(seed);
  Labeling lab;
  lab.q = q;
  lab.labels.resize(n);
  for (auto& l : lab.labels) l = static_cast<int>(rng.below(q));
  return lab;
}

}  // namespace detail

struct ClusterOutcome {
  Labeling labeling;
  std::string notes;  // conventions and fallbacks, one "key=value;" list
};

/// One spectral clustering run: operator -> top-k eigenpairs -> vertex
/// embedding -> sign split (q=2, one column) or k-means. Falls back to
/// seeded chance labels when no community-correlated real eigenvector is
/// available (below the detectability threshold).
inline ClusterOutcome cluster_graph(const Graph& g, int q, OperatorKind kind,
                                    std::uint64_t seed) {
  if (q < 2) throw std::invalid_argument("cluster_graph: q must be >= 2");
  const std::size_t n = static_cast<std::size_t>(g.num_vertices());
  ClusterOutcome out;
  std::ostringstream notes;
  notes << "operator=" << to_string(kind) << ";q=" << q << ";seed=" << seed << ";";

  SolverOpts opts;
  opts.seed = derive_seed(seed, 101);
  // k is exactly the number of needed eigenpairs: asking for one more can
  // stall on near-defective values at the bulk edge. A slightly wider
  // subspace keeps the restart from locking onto bulk-edge Ritz pairs.
  opts.max_iter = 150;
  opts.subspace = std::max<std::size_t>(26, 8 * static_cast<std::size_t>(q) + 10);
  std::uint64_t kseed = derive_seed(seed, 202);

  std::vector<std::vector<double>> cols;
  if (kind == OperatorKind::b_edge || kind == OperatorKind::b_prime) {
    // Work in the 2n-dimensional space; left eigenvectors of B' carry f in
    // their first n coordinates, so we iterate on B'^T.
    OperatorHandle op = build_b_prime(g).transposed();
    opts.k = q;
    EigenResult eig = topk_eigs(op, opts);
    auto raw = detail::real_vertex_columns(eig, op.dim(), 1, q - 1);
    notes << "space=b_prime_transposed;vectors=2.." << q << ";embedding=vertex_space;";
    for (auto& v : raw) {
      std::vector<double> f(n);
      std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n), f.begin());
      cols.push_back(std::move(f));
    }
  } else if (kind == OperatorKind::adjacency || kind == OperatorKind::random_walk) {
    // Vectors 2..q; random_walk runs on the induced non-isolated subgraph
    // (the operator itself rejects isolated vertices), isolated -> group 0.
    std::vector<VertexId> keep;
    for (VertexId v = 0; v < g.num_vertices(); ++v)
      if (g.neighbors_begin(v) != g.neighbors_end(v)) keep.push_back(v);
    bool induced = kind == OperatorKind::random_walk && keep.size() < n;
    Graph sub = g;
    std::vector<VertexId> back;
    if (induced) {
      std::vector<VertexId> remap(n, -1);
      for (std::size_t i = 0; i < keep.size(); ++i) remap[static_cast<std::size_t>(keep[i])] = static_cast<VertexId>(i);
      std::vector<std::pair<VertexId, VertexId>> edges;
      for (auto& e : g.edge_list())
        edges.emplace_back(remap[static_cast<std::size_t>(e.first)], remap[static_cast<std::size_t>(e.second)]);
      sub = Graph(static_cast<VertexId>(keep.size()), std::move(edges));
      back = keep;
      notes << "induced_nonisolated=true;isolated_label=0;";
    }
    OperatorHandle op = classical_operator(sub, kind);
    opts.k = q;
    EigenResult eig = topk_eigs(op, opts);
    auto raw = detail::real_vertex_columns(eig, op.dim(), 1, q - 1);
    notes << "vectors=2.." << q << ";";
    if (!induced) {
      cols = std::move(raw);
    } else {
      for (auto& v : raw) {
        std::vector<double> f(n, 0.0);
        for (std::size_t i = 0; i < back.size(); ++i) f[static_cast<std::size_t>(back[i])] = v[i];
        cols.push_back(std::move(f));
      }
    }
  } else if (kind == OperatorKind::laplacian) {
    // Smallest Laplacian eigenvectors via the spectral flip sigma*I - L;
    // the first (constant) one is skipped.
    double dmax = 0.0;
    for (VertexId v = 0; v < g.num_vertices(); ++v)
      dmax = std::max(dmax, static_cast<double>(g.neighbors_end(v) - g.neighbors_begin(v)));
    OperatorHandle op = detail::shifted_negated(classical_operator(g, OperatorKind::laplacian), 2.0 * dmax);
    opts.k = q;
    EigenResult eig = topk_eigs(op, opts);
    cols = detail::real_vertex_columns(eig, op.dim(), 1, q - 1);
    notes << "vectors=smallest 2.." << q << ";shift=" << detail::fmt_double(2.0 * dmax) << ";";
  } else if (kind == OperatorKind::modularity) {
    // Leading modularity vectors 1..q-1 (no trivial vector to skip).
    OperatorHandle op = classical_operator(g, OperatorKind::modularity);
    opts.k = q - 1;
    EigenResult eig = topk_eigs(op, opts);
    cols = detail::real_vertex_columns(eig, op.dim(), 0, q - 1);
    notes << "vectors=1.." << q - 1 << ";";
  } else {
    throw std::invalid_argument("cluster_graph: unsupported operator");
  }

  if (cols.empty()) {
    out.labeling = detail::chance_labels(n, q, kseed);
    notes << "fallback=chance(no real community eigenvector);";
  } else {
    if (static_cast<int>(cols.size()) < q - 1)
      notes << "fallback=reduced_columns(" << cols.size() << ");";
    VertexEmbedding emb = detail::embedding_from_columns(cols, n);
    out.labeling = detail::labels_from_embedding(emb, q, kseed);
    notes << "labeling=" << (q == 2 && emb.cols == 1 ? "sign" : "kmeans") << ";kmeans_restarts=10;";
  }
  out.notes = notes.str();
  return out;
}

struct ClusterSummary {
  std::string labels_path;
  std::string meta_path;
  double overlap_value = 0.0;
  bool has_overlap = false;
};

/// Full clustering command: load graph, run the pipeline, write labels and a
/// metadata file recording every convention; report overlap when truth given.
inline ClusterSummary cmd_cluster(const std::string& graph_path, int q, OperatorKind kind,
                                  std::uint64_t seed, const std::string& out_path,
                                  const std::string& truth_path = "") {
  Graph g = load_edge_list(graph_path);
  ClusterOutcome res = cluster_graph(g, q, kind, seed);
  ClusterSummary s;
  s.labels_path = out_path;
  s.meta_path = out_path + ".meta";
  save_labels(res.labeling.labels, out_path);

  std::ostringstream meta;
  meta << "format: nbt-cluster-meta-1\n";
  meta << "graph: " << graph_path << "\n";
  meta << "q: " << q << "\n";
  meta << "seed: " << seed << "\n";
  meta << "conventions: " << res.notes << "\n";
  if (!truth_path.empty()) {
    Labeling truth;
    truth.labels = load_labels(truth_path);
    truth.q = q;
    s.overlap_value = overlap(truth, res.labeling);
    s.has_overlap = true;
    meta << "overlap: " << detail::fmt_double(s.overlap_value) << "\n";
  }
  detail::write_text_file(s.meta_path, meta.str());
  return s;
}

// ---------------------------------------------------------------------------
// bp

struct BpSummary {
  std::string labels_path;
  std::string meta_path;
  bool converged = false;
  int sweeps = 0;
  double overlap_value = 0.0;
  bool has_overlap = false;
};

inline BpSummary cmd_bp(const std::string& graph_path, const SbmParams& params,
                        const BpOpts& opts, const std::string& out_path,
                        const std::string& truth_path = "") {
  Graph g = load_edge_list(graph_path);
  if (g.num_vertices() != params.n)
    throw std::invalid_argument("cmd_bp: params.n does not match graph size");
  BpResult res = bp_run(g, params, opts);
  BpSummary s;
  s.labels_path = out_path;
  s.meta_path = out_path + ".meta";
  s.converged = res.converged;
  s.sweeps = res.sweeps;
  save_labels(res.labeling.labels, out_path);

  std::ostringstream meta;
  meta << "format: nbt-bp-meta-1\n";
  meta << "graph: " << graph_path << "\n";
  meta << "q: " << params.q << "\n";
  meta << "seed: " << opts.seed << "\n";
  meta << "converged: " << (res.converged ? "true" : "false") << "\n";
  meta << "sweeps: " << res.sweeps << "\n";
  if (!truth_path.empty()) {
    Labeling truth;
    truth.labels = load_labels(truth_path);
    truth.q = params.q;
    s.overlap_value = overlap(truth, res.labeling);
    s.has_overlap = true;
    meta << "overlap: " << detail::fmt_double(s.overlap_value) << "\n";
  }
  detail::write_text_file(s.meta_path, meta.str());
  return s;
}

// ---------------------------------------------------------------------------
// sweep

enum class SweepVary { delta_at_fixed_c, c_at_fixed_ratio };

struct SweepSpec {
  SweepVary vary = SweepVary::delta_at_fixed_c;
  std::vector<double> grid;     // c_in - c_out values, or c values
  VertexId n = 10000;
  int q = 2;
  double c = 3.0;               // fixed mean degree (delta sweep)
  double ratio = 0.3;           // fixed c_out/c_in (c sweep)
  int seeds = 20;
  std::vector<std::string> algorithms{"nb"};
  std::uint64_t base_seed = 1;
  int threads = 1;

  void validate() const {
    if (grid.empty()) throw std::invalid_argument("SweepSpec: grid must be non-empty");
    if (seeds < 1) throw std::invalid_argument("SweepSpec: seeds must be >= 1");
    if (algorithms.empty()) throw std::invalid_argument("SweepSpec: algorithms must be non-empty");
    static const std::set<std::string> known{"nb",          "adjacency", "laplacian",
                                            "random_walk", "modularity", "bp"};
    for (auto& a : algorithms)
      if (!known.count(a)) throw std::invalid_argument("SweepSpec: unknown algorithm " + a);
    if (n < 2 || q < 2) throw std::invalid_argument("SweepSpec: need n >= 2 and q >= 2");
  }

  /// (c_in, c_out) at a grid point.
  std::pair<double, double> point_params(double x) const {
    if (vary == SweepVary::delta_at_fixed_c) {
      double c_out = c - x / q;
      return {c_out + x, c_out};
    }
    double c_in = static_cast<double>(q) * x / (1.0 + (q - 1) * ratio);
    return {c_in, ratio * c_in};
  }
};

inline const char* kSweepCsvHeader =
    "n,q,c,c_in,c_out,seed,algorithm,overlap,mu1,mu2,mu3_abs,wall_time_s";

namespace detail {

struct SweepRow {
  std::string key;   // c_in|c_out|seed|algorithm
  std::string line;  // full CSV line
  double overlap = 0.0;
  double mu1 = 0.0, mu2 = 0.0, mu3_abs = 0.0;
};

struct SweepTask {
  double c_in = 0.0, c_out = 0.0, c = 0.0;
  std::uint64_t seed = 0;
};

inline void run_sweep_task(const SweepSpec& spec, const SweepTask& task,
                           std::vector<SweepRow>& rows) {
  SbmParams params = SbmParams::two_value(spec.n, spec.q, task.c_in, task.c_out);
  LabeledGraph lg = sbm_sample(params, task.seed);
  Labeling truth{lg.labels, spec.q};

  // Shared spectral quantities mu1, mu2, |mu3| from B'.
  double mu1 = 0.0, mu2 = 0.0, mu3_abs = 0.0;
  {
    SolverOpts opts;
    opts.k = 3;
    opts.seed = derive_seed(task.seed, 11);
    EigenResult eig = topk_eigs(build_b_prime(lg.graph), opts);
    if (eig.values.size() > 0) mu1 = eig.values[0].real();
    if (eig.values.size() > 1) mu2 = eig.values[1].real();
    if (eig.values.size() > 2) mu3_abs = std::abs(eig.values[2]);
  }

  for (auto& alg : spec.algorithms) {
    auto t0 = std::chrono::steady_clock::now();
    Labeling pred;
    if (alg == "bp") {
      BpOpts bopts;
      bopts.seed = derive_seed(task.seed, 23);
      pred = bp_run(lg.graph, params, bopts).labeling;
    } else {
      OperatorKind kind = alg == "nb" ? OperatorKind::b_edge : parse_operator_kind(alg);
      pred = cluster_graph(lg.graph, spec.q, kind, derive_seed(task.seed, 37)).labeling;
    }
    double ov = overlap(truth, pred);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    SweepRow row;
    row.overlap = ov;
    row.mu1 = mu1;
    row.mu2 = mu2;
    row.mu3_abs = mu3_abs;
    std::ostringstream key;
    key << fmt_double(task.c_in) << "|" << fmt_double(task.c_out) << "|" << task.seed << "|" << alg;
    row.key = key.str();
    std::ostringstream line;
    line << spec.n << "," << spec.q << "," << fmt_double(task.c) << "," << fmt_double(task.c_in)
         << "," << fmt_double(task.c_out) << "," << task.seed << "," << alg << ","
         << fmt_double(ov) << "," << fmt_double(mu1) << "," << fmt_double(mu2) << ","
         << fmt_double(mu3_abs) << "," << fmt_double(secs);
    row.line = line.str();
    rows.push_back(std::move(row));
  }
}

}  // namespace detail

struct SweepSummary {
  std::string csv_path;
  std::string agg_path;
  int rows_written = 0;
  int rows_skipped = 0;
};

/// Run a parameter sweep and append one CSV row per (grid point, seed,
/// algorithm). Rows already present in the output file are skipped, so an
/// interrupted sweep resumes and a completed sweep reruns byte-identically.
/// A companion `<out>.agg` file holds per-(point, algorithm) mean and
/// standard error of the overlap.
inline SweepSummary cmd_sweep(const SweepSpec& spec, const std::string& out_csv) {
  spec.validate();
  SweepSummary summary;
  summary.csv_path = out_csv;
  summary.agg_path = out_csv + ".agg";

  // Collect keys of rows already in the file (resume support).
  std::set<std::string> done;
  bool have_file = false;
  {
    std::ifstream in(out_csv);
    if (in) {
      std::string line;
      if (std::getline(in, line)) {
        if (line != kSweepCsvHeader)
          throw std::runtime_error("cmd_sweep: existing file has a different schema: " + out_csv);
        have_file = true;
        while (std::getline(in, line)) {
          // key = fields 3 (c_in), 4 (c_out), 5 (seed), 6 (algorithm).
          std::vector<std::string> f;
          std::stringstream ss(line);
          std::string tok;
          while (std::getline(ss, tok, ',')) f.push_back(tok);
          if (f.size() < 7) continue;
          done.insert(f[3] + "|" + f[4] + "|" + f[5] + "|" + f[6]);
        }
      }
    }
  }

  std::vector<detail::SweepTask> tasks;
  for (std::size_t pi = 0; pi < spec.grid.size(); ++pi) {
    auto [c_in, c_out] = spec.point_params(spec.grid[pi]);
    if (c_in < 0.0 || c_out < 0.0)
      throw std::invalid_argument("cmd_sweep: grid point yields negative affinity");
    for (int si = 0; si < spec.seeds; ++si) {
      detail::SweepTask t;
      t.c_in = c_in;
      t.c_out = c_out;
      t.c = (c_in + (spec.q - 1) * c_out) / spec.q;
      t.seed = derive_seed(spec.base_seed, pi * 100003ull + static_cast<std::uint64_t>(si));
      tasks.push_back(t);
    }
  }

  // A task is pending if any of its algorithm rows is missing.
  auto task_pending = [&](const detail::SweepTask& t) {
    for (auto& alg : spec.algorithms) {
      std::ostringstream key;
      key << detail::fmt_double(t.c_in) << "|" << detail::fmt_double(t.c_out) << "|" << t.seed
          << "|" << alg;
      if (!done.count(key.str())) return true;
    }
    return false;
  };

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (task_pending(tasks[i])) pending.push_back(i);

  std::vector<std::vector<detail::SweepRow>> results(tasks.size());
  int nthreads = std::max(1, spec.threads);
  if (nthreads == 1 || pending.size() <= 1) {
    for (std::size_t i : pending) detail::run_sweep_task(spec, tasks[i], results[i]);
  } else {
    std::vector<std::thread> workers;
    std::size_t next = 0;
    std::mutex mtx;
    for (int w = 0; w < nthreads; ++w)
      workers.emplace_back([&] {
        for (;;) {
          std::size_t mine;
          {
            std::lock_guard<std::mutex> lock(mtx);
            if (next >= pending.size()) return;
            mine = next++;
          }
          detail::run_sweep_task(spec, tasks[pending[mine]], results[pending[mine]]);
        }
      });
    for (auto& w : workers) w.join();
  }

  // Single-writer collection in deterministic task order; flush per row so
  // partial results survive interruption.
  std::ofstream out(out_csv, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cmd_sweep: cannot write " + out_csv);
  if (!have_file) {
    out << kSweepCsvHeader << "\n";
    out.flush();
  }
  for (std::size_t i = 0; i < tasks.size(); ++i)
    for (auto& row : results[i]) {
      if (done.count(row.key)) {
        ++summary.rows_skipped;
        continue;
      }
      out << row.line << "\n";
      out.flush();
      ++summary.rows_written;
    }
  summary.rows_skipped += static_cast<int>(done.size());
  out.close();

  // Aggregate from the full file so resumed runs see every row.
  struct Agg {
    int count = 0;
    double sum = 0.0, sum2 = 0.0;
    double mu1 = 0.0, mu2 = 0.0, mu3_abs = 0.0;
  };
  std::map<std::string, Agg> aggs;  // key c_in|c_out|algorithm, insertion via map = sorted
  {
    std::ifstream in(out_csv);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string tok;
      while (std::getline(ss, tok, ',')) f.push_back(tok);
      if (f.size() < 12) continue;
      Agg& a = aggs[f[3] + "," + f[4] + "," + f[6]];
      double ov = std::stod(f[7]);
      ++a.count;
      a.sum += ov;
      a.sum2 += ov * ov;
      a.mu1 += std::stod(f[8]);
      a.mu2 += std::stod(f[9]);
      a.mu3_abs += std::stod(f[10]);
    }
  }
  std::ostringstream agg;
  agg << "c_in,c_out,algorithm,count,overlap_mean,overlap_stderr,mu1_mean,mu2_mean,mu3_abs_mean\n";
  for (auto& [key, a] : aggs) {
    double mean = a.sum / a.count;
    double var = a.count > 1 ? std::max(0.0, (a.sum2 - a.count * mean * mean) / (a.count - 1)) : 0.0;
    double stderr_ = a.count > 1 ? std::sqrt(var / a.count) : 0.0;
    agg << key << "," << a.count << "," << detail::fmt_double(mean) << ","
        << detail::fmt_double(stderr_) << "," << detail::fmt_double(a.mu1 / a.count) << ","
        << detail::fmt_double(a.mu2 / a.count) << "," << detail::fmt_double(a.mu3_abs / a.count)
        << "\n";
  }
  detail::write_text_file(summary.agg_path, agg.str());
  return summary;
}

}  // namespace nbt
