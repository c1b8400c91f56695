#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "nbt/eigen.hpp"
#include "nbt/generate.hpp"
#include "nbt/operators.hpp"
#include "nbt/prediction.hpp"
#include "test_util.hpp"

using namespace nbt;

namespace {

std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

// +-1 eigenvalue multiset of B via the vertex reduction plus multiplicities.
std::vector<std::complex<double>> b_values_via_b_prime(const Graph& g) {
  auto vals = dense_spectrum(build_b_prime(g)).values;
  long extra = static_cast<long>(g.num_edges()) - g.num_vertices();
  for (long i = 0; i < extra; ++i) {
    vals.push_back({1.0, 0.0});
    vals.push_back({-1.0, 0.0});
  }
  return vals;
}

}  // namespace

TEST_CASE("B on P_3 moves the indicator one step without backtracking") {
  Graph g(3, {{0, 1}, {1, 2}});
  auto b = build_b(g);
  // With rows indexed by the *receiving* edge, the forward propagation of a
  // message along 0->1 is the transpose image: it lands on 1->2 only.
  std::vector<double> x(4, 0.0);
  x[static_cast<std::size_t>(g.locate(0, 1))] = 1.0;
  auto y = b.apply_transpose(x);
  for (EdgeId e = 0; e < 4; ++e)
    REQUIRE(y[static_cast<std::size_t>(e)] == (e == g.locate(1, 2) ? 1.0 : 0.0));
}

TEST_CASE("B on C_3 fixes the all-ones vector") {
  auto g = testutil::cycle_graph(3);
  auto y = build_b(g).apply(ones(6));
  for (double v : y) REQUIRE(v == 1.0);
}

TEST_CASE("B on K_{1,3}: all-ones maps to d-1 row sums") {
  auto g = testutil::star_graph(3);
  auto b = build_b(g);
  auto y = b.apply(ones(6));
  for (EdgeId e = 0; e < 6; ++e) {
    double want = g.head(e) == 0 ? 2.0 : 0.0;  // rows ending at the center have d-1 = 2
    REQUIRE(y[static_cast<std::size_t>(e)] == want);
  }
}

TEST_CASE("row sums of B are d_head - 1 exactly") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto g = testutil::random_graph(40, 0.1, seed);
    auto y = build_b(g).apply(ones(static_cast<std::size_t>(g.num_directed_edges())));
    for (EdgeId e = 0; e < g.num_directed_edges(); ++e)
      REQUIRE(y[static_cast<std::size_t>(e)] == static_cast<double>(g.degree(g.head(e)) - 1));
  }
}

TEST_CASE("stochastic trace of B vanishes") {
  auto lg = sbm_sample(SbmParams::two_value(2000, 2, 5.0, 1.0), 3);
  auto b = build_b(lg.graph);
  const std::size_t dim = b.dim();
  Rng rng(17);
  double est = 0.0;
  const int probes = 30;
  for (int p = 0; p < probes; ++p) {
    std::vector<double> z(dim);
    for (auto& v : z) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
    auto bz = b.apply(z);
    double dot = 0.0;
    for (std::size_t i = 0; i < dim; ++i) dot += z[i] * bz[i];
    est += dot / probes;
  }
  // Hutchinson estimator of tr B = 0; fluctuation scale ~ ||B||_F / sqrt(probes).
  double frob2 = 0.0;
  for (VertexId v = 0; v < lg.graph.num_vertices(); ++v) {
    double d = static_cast<double>(lg.graph.degree(v));
    frob2 += d * (d - 1.0);
  }
  REQUIRE(std::abs(est) < 5.0 * std::sqrt(frob2 / probes));
}

TEST_CASE("apply and apply_transpose are adjoint and linear") {
  auto g = testutil::random_graph(30, 0.15, 2);
  std::vector<OperatorHandle> ops{build_b(g), build_b_prime(g),
                                  classical_operator(g, OperatorKind::adjacency),
                                  classical_operator(g, OperatorKind::laplacian),
                                  classical_operator(g, OperatorKind::modularity)};
  Rng rng(23);
  for (auto& op : ops) {
    const std::size_t d = op.dim();
    std::vector<double> x(d), y(d);
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    // <Bx, y> = <x, B^T y>
    auto bx = op.apply(x);
    auto bty = op.apply_transpose(y);
    double lhs = 0.0, rhs = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      lhs += bx[i] * y[i];
      rhs += x[i] * bty[i];
      scale += std::abs(bx[i] * y[i]);
    }
    REQUIRE(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, scale));
    // Linearity on random probes.
    std::vector<double> z(d);
    for (std::size_t i = 0; i < d; ++i) z[i] = 0.7 * x[i] - 1.3 * y[i];
    auto bz = op.apply(z);
    auto by = op.apply(y);
    for (std::size_t i = 0; i < d; ++i)
      REQUIRE(bz[i] == Catch::Approx(0.7 * bx[i] - 1.3 * by[i]).margin(1e-10));
  }
}

TEST_CASE("classical operator identities on the all-ones vector") {
  auto g = testutil::random_graph(25, 0.2, 4);
  const std::size_t n = static_cast<std::size_t>(g.num_vertices());
  auto lap = classical_operator(g, OperatorKind::laplacian).apply(ones(n));
  for (double v : lap) REQUIRE(std::abs(v) < 1e-12);
  auto mod = classical_operator(g, OperatorKind::modularity).apply(ones(n));
  for (double v : mod) REQUIRE(std::abs(v) < 1e-12);

  // Random walk is row-stochastic; needs no isolated vertices.
  auto lg = sbm_sample(SbmParams::two_value(100, 2, 8.0, 4.0), 5);
  bool isolated = false;
  for (VertexId v = 0; v < lg.graph.num_vertices(); ++v)
    if (lg.graph.degree(v) == 0) isolated = true;
  if (!isolated) {
    auto q = classical_operator(lg.graph, OperatorKind::random_walk)
                 .apply(ones(static_cast<std::size_t>(lg.graph.num_vertices())));
    for (double v : q) REQUIRE(v == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("random_walk operator rejects isolated vertices") {
  Graph g(3, {{0, 1}});  // vertex 2 isolated
  REQUIRE_THROWS_WITH(classical_operator(g, OperatorKind::random_walk),
                      Catch::Matchers::ContainsSubstring("2"));
}

TEST_CASE("weighted B reduces to B at unit weights") {
  auto g = testutil::random_graph(20, 0.2, 6);
  auto b = build_b(g);
  auto wb = build_weighted_b(g, std::vector<double>(static_cast<std::size_t>(g.num_edges()), 1.0));
  Rng rng(31);
  std::vector<double> x(b.dim());
  for (auto& v : x) v = rng.normal();
  auto y1 = b.apply(x);
  auto y2 = wb.apply(x);
  for (std::size_t i = 0; i < b.dim(); ++i) REQUIRE(y2[i] == Catch::Approx(y1[i]).margin(1e-12));
}

TEST_CASE("weighted B on C_3: uniform weight scales the leading eigenvalue") {
  auto g = testutil::cycle_graph(3);
  auto wb = build_weighted_b(g, {2.0, 2.0, 2.0});
  auto eig = dense_spectrum(wb);
  REQUIRE(std::abs(eig.values.front() - std::complex<double>(2.0, 0.0)) < 1e-10);
}

TEST_CASE("weighted B with a zero weight on C_3 is nilpotent") {
  auto g = testutil::cycle_graph(3);
  auto wb = build_weighted_b(g, {0.0, 1.0, 1.0});
  Matrix m = materialize(wb);
  Matrix p = Matrix::identity(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) p = p * m;
  for (double v : p.a) REQUIRE(std::abs(v) < 1e-12);
}

TEST_CASE("weighted B rejects a wrong-size weight vector") {
  auto g = testutil::cycle_graph(3);
  REQUIRE_THROWS_AS(build_weighted_b(g, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("predict fills the closed forms for the two-value case") {
  auto pred = predict(SbmParams::two_value(1000, 2, 5.0, 1.0));
  REQUIRE(pred.c == Catch::Approx(3.0).margin(1e-12));
  REQUIRE(pred.lambda_c_valid);
  REQUIRE(pred.lambda_c == Catch::Approx(3.5).margin(1e-12));
  REQUIRE(pred.mu_c_valid);
  REQUIRE(pred.mu_c == Catch::Approx(2.0).margin(1e-9));
  REQUIRE(pred.bulk_radius == Catch::Approx(std::sqrt(3.0)).margin(1e-12));
  REQUIRE(pred.detectable);
  // T eigenvalues {2/3, 0}; c * (2/3) = mu_c.
  REQUIRE(pred.t_eigenvalues.size() == 2);
  REQUIRE(pred.t_eigenvalues[0] == Catch::Approx(2.0 / 3.0).margin(1e-9));
  REQUIRE(pred.t_eigenvalues[1] == Catch::Approx(0.0).margin(1e-9));
  REQUIRE(pred.c * pred.t_eigenvalues[0] == Catch::Approx(pred.mu_c).margin(1e-9));

  auto flat = predict(SbmParams::two_value(1000, 2, 3.0, 3.0));
  REQUIRE(flat.mu_c == Catch::Approx(0.0).margin(1e-9));
  REQUIRE_FALSE(flat.detectable);
}

TEST_CASE("predict flags non-uniform group degrees") {
  SbmParams params;
  params.n = 1000;
  params.q = 2;
  params.group_fracs = {0.5, 0.5};
  params.affinity = {{8.0, 1.0}, {1.0, 2.0}};
  auto pred = predict(params);
  REQUIRE_FALSE(pred.uniform_degrees);
  REQUIRE_FALSE(pred.mu_c_valid);
  REQUIRE(pred.group_degrees.size() == 2);
  REQUIRE(pred.group_degrees[0] == Catch::Approx(4.5).margin(1e-12));
  REQUIRE(pred.group_degrees[1] == Catch::Approx(1.5).margin(1e-12));
}

TEST_CASE("B' of a single edge has spectrum {0, 0, 1, -1}") {
  Graph g(2, {{0, 1}});
  auto eig = dense_spectrum(build_b_prime(g));
  REQUIRE(testutil::multiset_match(eig.values, {{1, 0}, {-1, 0}, {0, 0}, {0, 0}}, 1e-8));
}

TEST_CASE("Ihara identity: eigs(B) = eigs(B') u {+-1}^(m-n) on small graphs") {
  std::vector<Graph> corpus;
  corpus.push_back(testutil::complete_graph(4));
  corpus.push_back(testutil::cycle_graph(5));
  corpus.push_back(testutil::cycle_graph(6));
  // Random graphs are reduced to their 2-cores: dangling trees only add
  // defective zero eigenvalues, which plain QR locates no better than
  // ~eps^(1/k), drowning the 1e-6 identity check.
  for (std::uint64_t seed = 1; seed <= 8; ++seed)
    corpus.push_back(testutil::two_core(testutil::random_graph(16, 0.25, seed)));
  for (auto& g : corpus) {
    if (g.num_edges() < g.num_vertices() || g.num_vertices() == 0) continue;
    auto direct = dense_spectrum(build_b(g)).values;
    auto reduced = b_values_via_b_prime(g);
    double worst = 0.0;
    REQUIRE(testutil::multiset_match(direct, reduced, 1e-6, &worst));
  }
}

TEST_CASE("singular values of B follow the degree closed form") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto g = testutil::random_graph(18, 0.2, seed);
    if (g.num_edges() < 2) continue;
    Matrix b = materialize(build_b(g));
    auto eig = dense::jacobi_symmetric(b * b.transposed(), false);
    std::vector<double> got;
    for (double v : eig.values) got.push_back(std::sqrt(std::max(0.0, v)));
    // {d_v - 1} over non-isolated vertices, plus 1s; isolated vertices do not
    // touch the edge space at all.
    std::vector<double> want;
    VertexId covered = 0;
    for (VertexId v = 0; v < g.num_vertices(); ++v)
      if (g.degree(v) > 0) {
        want.push_back(static_cast<double>(g.degree(v)) - 1.0);
        ++covered;
      }
    for (EdgeId i = 0; i < 2 * g.num_edges() - covered; ++i) want.push_back(1.0);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      REQUIRE(got[i] == Catch::Approx(want[i]).margin(1e-8));
  }
}

TEST_CASE("regular graphs: eigenvalues of B pair up with mu+ mu- = d - 1") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto g = testutil::random_regular(16, 3, seed);
    auto bvals = dense_spectrum(build_b(g)).values;
    Matrix a = materialize(classical_operator(g, OperatorKind::adjacency));
    auto avals = dense::jacobi_symmetric(a, false).values;
    const double d = 3.0;
    for (auto mu : bvals) {
      if (std::abs(mu - std::complex<double>(1, 0)) < 1e-6) continue;
      if (std::abs(mu + std::complex<double>(1, 0)) < 1e-6) continue;
      // mu solves mu^2 - lambda mu + (d-1) = 0 for some adjacency lambda.
      bool matched = false;
      for (double lam : avals) {
        std::complex<double> disc = std::sqrt(std::complex<double>(lam * lam - 4.0 * (d - 1.0)));
        std::complex<double> mup = 0.5 * (lam + disc), mum = 0.5 * (lam - disc);
        if (std::abs(mu - mup) < 1e-6 || std::abs(mu - mum) < 1e-6) {
          REQUIRE(std::abs(mup * mum - (d - 1.0)) < 1e-8);
          matched = true;
          break;
        }
      }
      REQUIRE(matched);
    }
  }
}

TEST_CASE("unicyclic components keep all eigenvalue moduli in {0, 1}") {
  for (int k : {3, 4, 5, 7}) {
    auto eig = dense_spectrum(build_b(testutil::cycle_graph(k)));
    for (auto v : eig.values) REQUIRE(std::abs(v) == Catch::Approx(1.0).margin(1e-8));
  }
}

TEST_CASE("quadratic eigenvector relation on the vertex reduction") {
  auto lg = sbm_sample(SbmParams::two_value(150, 2, 6.0, 1.5), 9);
  const Graph& g = lg.graph;
  const std::size_t n = static_cast<std::size_t>(g.num_vertices());
  auto eig = dense_spectrum(build_b_prime(g), true);
  int checked = 0;
  for (std::size_t i = 0; i < eig.values.size() && checked < 3; ++i) {
    auto mu = eig.values[i];
    if (std::abs(mu) < 1.2) continue;  // keep away from the defective core
    // Right eigenvector (u, w) of B': A w = mu w + (D - I) w / mu.
    std::vector<std::complex<double>> w(eig.vectors[i].begin() + static_cast<std::ptrdiff_t>(n),
                                        eig.vectors[i].end());
    std::vector<std::complex<double>> aw(n, 0.0);
    for (VertexId v = 0; v < g.num_vertices(); ++v)
      for (auto it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it)
        aw[static_cast<std::size_t>(v)] += w[static_cast<std::size_t>(*it)];
    double rnorm = 0.0, wnorm = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      std::complex<double> want =
          mu * w[v] + (static_cast<double>(g.degree(static_cast<VertexId>(v))) - 1.0) * w[v] / mu;
      rnorm += std::norm(aw[v] - want);
      wnorm += std::norm(w[v]);
    }
    REQUIRE(std::sqrt(rnorm) <= 1e-6 * std::sqrt(wnorm));
    ++checked;
  }
  REQUIRE(checked > 0);
}

TEST_CASE("semicircle density: normalization and midpoint value") {
  const double c = 3.0;
  double integral = 0.0;
  const int steps = 200000;
  double lo = -2.0 * std::sqrt(c), hi = 2.0 * std::sqrt(c);
  for (int i = 0; i < steps; ++i) {
    double x = lo + (hi - lo) * (i + 0.5) / steps;
    integral += semicircle_density(x, c) * (hi - lo) / steps;
  }
  REQUIRE(integral == Catch::Approx(1.0).margin(1e-4));
  REQUIRE(semicircle_density(0.0, c) ==
          Catch::Approx(1.0 / (3.14159265358979323846 * std::sqrt(c))).margin(1e-12));
  REQUIRE(semicircle_density(2.0 * std::sqrt(c) + 0.1, c) == 0.0);
}

TEST_CASE("materialize refuses large operators") {
  auto lg = sbm_sample(SbmParams::two_value(4000, 2, 5.0, 1.0), 1);
  REQUIRE_THROWS_AS(materialize(build_b(lg.graph)), std::invalid_argument);
}
