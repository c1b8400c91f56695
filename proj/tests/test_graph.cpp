#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>

#include "nbt/edgelist_io.hpp"
#include "nbt/generate.hpp"
#include "nbt/graph.hpp"
#include "test_util.hpp"

using namespace nbt;

namespace {

std::string temp_path(const std::string& name) {
  return std::string("/tmp/nbt_test_") + name;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

double poisson_pmf(int k, double lambda) {
  double logp = -lambda + k * std::log(lambda) - std::lgamma(k + 1.0);
  return std::exp(logp);
}

}  // namespace

TEST_CASE("graph construction rejects self-loops and duplicates") {
  REQUIRE_THROWS_AS(Graph(3, {{0, 0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(Graph(3, {{0, 1}, {1, 0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(Graph(2, {{0, 2}}), std::invalid_argument);
}

TEST_CASE("edge index round trip and reverse involution") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto g = testutil::random_graph(30, 0.15, seed);
    for (EdgeId e = 0; e < g.num_directed_edges(); ++e) {
      EdgeId r = g.reverse(e);
      REQUIRE(g.reverse(r) == e);
      REQUIRE(g.tail(r) == g.head(e));
      REQUIRE(g.head(r) == g.tail(e));
      REQUIRE(g.locate(g.tail(e), g.head(e)) == e);
    }
    // degree = number of incoming directed edges.
    std::vector<int> incoming(static_cast<std::size_t>(g.num_vertices()), 0);
    for (EdgeId e = 0; e < g.num_directed_edges(); ++e)
      ++incoming[static_cast<std::size_t>(g.head(e))];
    for (VertexId v = 0; v < g.num_vertices(); ++v)
      REQUIRE(incoming[static_cast<std::size_t>(v)] == g.degree(v));
  }
}

TEST_CASE("sbm_sample: mean degree and trivial cases") {
  // (q=2, c_in=5, c_out=1) has mean degree 3; average over seeds.
  double total = 0.0;
  const int reps = 8;
  for (std::uint64_t seed = 1; seed <= reps; ++seed) {
    auto lg = sbm_sample(SbmParams::two_value(4000, 2, 5.0, 1.0), seed);
    total += 2.0 * static_cast<double>(lg.graph.num_edges()) / 4000.0;
  }
  REQUIRE(total / reps == Catch::Approx(3.0).epsilon(0.05));

  SbmParams empty;
  empty.n = 10;
  empty.q = 1;
  empty.group_fracs = {1.0};
  empty.affinity = {{0.0}};
  REQUIRE(sbm_sample(empty, 1).graph.num_edges() == 0);

  SbmParams bad = SbmParams::two_value(10, 2, 20.0, 1.0);
  REQUIRE_THROWS_AS(sbm_sample(bad, 1), std::invalid_argument);
}

TEST_CASE("sbm_sample degree histogram is Poisson(3) by chi-square") {
  // Aggregate degrees over 50 samples of an unstructured c=3 graph and test
  // against Poisson(3) at the 1% level (13 dof after binning 0..12, 13+).
  const int n = 10000, reps = 50;
  std::vector<double> counts(14, 0.0);
  for (std::uint64_t seed = 1; seed <= reps; ++seed) {
    auto lg = sbm_sample(SbmParams::two_value(n, 2, 3.0, 3.0), seed);
    for (VertexId v = 0; v < n; ++v)
      ++counts[static_cast<std::size_t>(std::min<EdgeId>(lg.graph.degree(v), 13))];
  }
  double total = static_cast<double>(n) * reps;
  double chi2 = 0.0;
  double tail = 1.0;
  for (int k = 0; k < 13; ++k) {
    double p = poisson_pmf(k, 3.0);
    tail -= p;
    double expect = total * p;
    chi2 += (counts[static_cast<std::size_t>(k)] - expect) * (counts[static_cast<std::size_t>(k)] - expect) / expect;
  }
  chi2 += (counts[13] - total * tail) * (counts[13] - total * tail) / (total * tail);
  REQUIRE(chi2 < 27.688);  // chi-square 1% critical value, 13 dof
}

TEST_CASE("sbm_sample group sizes concentrate at n/q") {
  const int n = 10000, q = 2;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto lg = sbm_sample(SbmParams::two_value(n, q, 4.0, 2.0), seed);
    std::vector<int> sizes(q, 0);
    for (int lab : lg.labels) ++sizes[static_cast<std::size_t>(lab)];
    for (int a = 0; a < q; ++a)
      REQUIRE(std::abs(sizes[static_cast<std::size_t>(a)] - n / q) < 5.0 * std::sqrt(n));
  }
}

TEST_CASE("degree_stats closed forms") {
  REQUIRE_THROWS_AS(degree_stats(Graph(3, {})), std::invalid_argument);

  auto k4 = testutil::complete_graph(4);  // 3-regular
  auto [mean_r, branch_r] = degree_stats(k4);
  REQUIRE(mean_r == Catch::Approx(3.0).margin(1e-14));
  REQUIRE(branch_r == Catch::Approx(2.0).margin(1e-14));

  auto star = testutil::star_graph(3);
  auto [mean_s, branch_s] = degree_stats(star);
  REQUIRE(mean_s == Catch::Approx(1.5).margin(1e-14));
  REQUIRE(branch_s == Catch::Approx(1.0).margin(1e-14));

  // Poisson identity: branching ratio -> c for SBM with mean degree c.
  auto lg = sbm_sample(SbmParams::two_value(20000, 2, 3.0, 3.0), 7);
  auto [mean_p, branch_p] = degree_stats(lg.graph);
  REQUIRE(mean_p == Catch::Approx(3.0).epsilon(0.05));
  REQUIRE(branch_p == Catch::Approx(3.0).epsilon(0.1));
}

TEST_CASE("config_model_sample: disjoint regular groups at zero cross rate") {
  DegreeSeqParams params;
  params.degree_dist = {{3, 1.0}};
  params.tilde_c_in = 4.0;
  params.tilde_c_out = 0.0;
  params.n = 200;
  auto lg = config_model_sample(params, 3);
  REQUIRE(lg.graph.num_vertices() == 200);
  for (VertexId v = 0; v < 200; ++v) REQUIRE(lg.graph.degree(v) == 3);
  for (auto& [u, v] : lg.graph.edge_list())
    REQUIRE(lg.labels[static_cast<std::size_t>(u)] == lg.labels[static_cast<std::size_t>(v)]);
}

TEST_CASE("config_model_sample degree histogram matches the target distribution") {
  DegreeSeqParams params;
  params.degree_dist = {{2, 0.3}, {3, 0.4}, {5, 0.3}};
  // branching ratio = <k^2>/<k> - 1
  double k1 = 2 * 0.3 + 3 * 0.4 + 5 * 0.3;
  double k2 = 4 * 0.3 + 9 * 0.4 + 25 * 0.3;
  double tilde_c = k2 / k1 - 1.0;
  params.tilde_c_in = 1.2 * tilde_c;
  params.tilde_c_out = 0.8 * tilde_c;
  params.n = 10000;
  auto lg = config_model_sample(params, 11);

  std::map<int, double> hist;
  for (VertexId v = 0; v < params.n; ++v) hist[static_cast<int>(lg.graph.degree(v))] += 1.0;
  double tv = 0.0;
  std::map<int, double> target{{2, 0.3}, {3, 0.4}, {5, 0.3}};
  for (auto& [k, p] : target) tv += std::abs(hist[k] / params.n - p);
  for (auto& [k, cnt] : hist)
    if (!target.count(k)) tv += cnt / params.n;
  REQUIRE(tv / 2.0 < 0.02);
}

TEST_CASE("config_model_sample validates branching consistency") {
  DegreeSeqParams params;
  params.degree_dist = {{3, 1.0}};
  params.tilde_c_in = 1.0;  // sum far from 2 * branching ratio (= 4)
  params.tilde_c_out = 1.0;
  params.n = 100;
  REQUIRE_THROWS_AS(config_model_sample(params, 1), std::invalid_argument);
}

TEST_CASE("component_census classifies trees, unicyclic, multicyclic") {
  auto census_p5 = component_census(testutil::path_graph(5));
  REQUIRE(census_p5.size() == 1);
  REQUIRE(census_p5[0].kind == ComponentKind::tree);

  // C_4 plus an isolated vertex.
  Graph g(5, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  auto census = component_census(g);
  REQUIRE(census.size() == 2);
  int trees = 0, unicyclic = 0;
  for (auto& c : census) {
    if (c.kind == ComponentKind::tree) ++trees;
    if (c.kind == ComponentKind::unicyclic) ++unicyclic;
  }
  REQUIRE(trees == 1);
  REQUIRE(unicyclic == 1);

  auto census_k4 = component_census(testutil::complete_graph(4));
  REQUIRE(census_k4.size() == 1);
  REQUIRE(census_k4[0].kind == ComponentKind::multicyclic);
}

TEST_CASE("load_edge_list basics and errors") {
  auto p3 = temp_path("p3.edges");
  write_file(p3, "# a comment\n0 1\n1 2\n");
  Graph g = load_edge_list(p3);
  REQUIRE(g.num_vertices() == 3);
  REQUIRE(g.num_edges() == 2);

  auto loop = temp_path("loop.edges");
  write_file(loop, "0 0\n");
  REQUIRE_THROWS_WITH(load_edge_list(loop), Catch::Matchers::ContainsSubstring(":1: self-loop"));

  auto dup = temp_path("dup.edges");
  write_file(dup, "0 1\n1 0\n");
  REQUIRE_THROWS_WITH(load_edge_list(dup), Catch::Matchers::ContainsSubstring("duplicate edge"));

  auto garbage = temp_path("garbage.edges");
  write_file(garbage, "0 x\n");
  REQUIRE_THROWS_WITH(load_edge_list(garbage), Catch::Matchers::ContainsSubstring("non-integer"));

  REQUIRE_THROWS_AS(load_edge_list(temp_path("missing.edges")), std::runtime_error);

  // Isolated vertices: max id defines n.
  auto iso = temp_path("iso.edges");
  write_file(iso, "0 5\n");
  REQUIRE(load_edge_list(iso).num_vertices() == 6);
}

TEST_CASE("save/load round trip preserves the graph") {
  auto g = testutil::random_graph(40, 0.1, 9);
  auto path = temp_path("roundtrip.edges");
  save_edge_list(g, path);
  Graph h = load_edge_list(path);
  REQUIRE(g.num_vertices() == h.num_vertices());
  REQUIRE(g.edge_list() == h.edge_list());

  std::vector<int> labels{0, 1, 1, 0, 2};
  auto lp = temp_path("labels.txt");
  save_labels(labels, lp);
  REQUIRE(load_labels(lp) == labels);
}

TEST_CASE("weighted edge list loads weights in canonical edge order") {
  auto path = temp_path("weighted.edges");
  write_file(path, "1 2 0.5\n0 1 2.0\n");
  WeightedGraph wg = load_weighted_edge_list(path);
  REQUIRE(wg.graph.num_edges() == 2);
  auto edges = wg.graph.edge_list();
  REQUIRE(edges[0] == std::make_pair<VertexId, VertexId>(0, 1));
  REQUIRE(wg.edge_weights[0] == Catch::Approx(2.0));
  REQUIRE(wg.edge_weights[1] == Catch::Approx(0.5));
}
