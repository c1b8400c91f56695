// Command-line front end: generate, spectrum, cluster, bp, sweep.
// Exit codes: 0 success, 1 usage error, 2 numerical failure.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nbt/commands.hpp"

namespace {

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

std::vector<std::string> parse_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-backtracking spectral community detection toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_path = "out";
  app.add_option("--seed", seed, "Base random seed");
  app.add_option("--threads", threads, "Worker threads for sweeps");
  app.add_option("--out", out_path, "Output path (base name or file)");

  // generate
  auto* gen = app.add_subcommand("generate", "Sample a block-model graph");
  int gen_n = 1000, gen_q = 2;
  double gen_cin = 5.0, gen_cout = 1.0;
  gen->add_option("--n", gen_n, "Number of vertices");
  gen->add_option("--q", gen_q, "Number of groups");
  gen->add_option("--c-in", gen_cin, "Within-group affinity c_in");
  gen->add_option("--c-out", gen_cout, "Between-group affinity c_out");

  // spectrum
  auto* spec = app.add_subcommand("spectrum", "Eigenvalues of a graph operator");
  std::string sp_graph, sp_op = "b_prime", sp_mode = "dense";
  int sp_k = 4;
  spec->add_option("--graph", sp_graph, "Edge-list file")->required();
  spec->add_option("--operator", sp_op, "b|b_prime|adjacency|laplacian|random_walk|modularity");
  spec->add_option("--mode", sp_mode, "dense or topk");
  spec->add_option("--k", sp_k, "Eigenpair count for topk mode");

  // cluster
  auto* clu = app.add_subcommand("cluster", "Spectral clustering pipeline");
  std::string cl_graph, cl_op = "b", cl_truth;
  int cl_q = 2;
  clu->add_option("--graph", cl_graph, "Edge-list file")->required();
  clu->add_option("--q", cl_q, "Number of groups");
  clu->add_option("--operator", cl_op, "b|adjacency|laplacian|random_walk|modularity");
  clu->add_option("--truth", cl_truth, "Ground-truth labels file (reports overlap)");

  // bp
  auto* bp = app.add_subcommand("bp", "Belief-propagation inference");
  std::string bp_graph, bp_truth;
  int bp_q = 2, bp_sweeps = 500;
  double bp_cin = 5.0, bp_cout = 1.0, bp_tol = 1e-6, bp_damping = 0.0;
  bp->add_option("--graph", bp_graph, "Edge-list file")->required();
  bp->add_option("--q", bp_q, "Number of groups");
  bp->add_option("--c-in", bp_cin, "Within-group affinity c_in");
  bp->add_option("--c-out", bp_cout, "Between-group affinity c_out");
  bp->add_option("--max-sweeps", bp_sweeps, "Maximum sweeps");
  bp->add_option("--tol", bp_tol, "Convergence tolerance");
  bp->add_option("--damping", bp_damping, "Damping factor in [0,1)");
  bp->add_option("--truth", bp_truth, "Ground-truth labels file (reports overlap)");

  // sweep
  auto* swp = app.add_subcommand("sweep", "Parameter sweep to CSV");
  std::string sw_vary = "delta", sw_grid, sw_algs = "nb";
  int sw_n = 10000, sw_q = 2, sw_seeds = 20;
  double sw_c = 3.0, sw_ratio = 0.3;
  swp->add_option("--vary", sw_vary, "delta (c_in-c_out at fixed c) or c (at fixed ratio)");
  swp->add_option("--grid", sw_grid, "Comma-separated grid values")->required();
  swp->add_option("--n", sw_n, "Vertices per sample");
  swp->add_option("--q", sw_q, "Number of groups");
  swp->add_option("--c", sw_c, "Fixed mean degree (delta sweep)");
  swp->add_option("--ratio", sw_ratio, "Fixed c_out/c_in (c sweep)");
  swp->add_option("--seeds", sw_seeds, "Samples per grid point");
  swp->add_option("--algorithms", sw_algs,
                  "Comma-separated: nb,adjacency,laplacian,random_walk,modularity,bp");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      auto params = nbt::SbmParams::two_value(gen_n, gen_q, gen_cin, gen_cout);
      auto s = nbt::cmd_generate(params, seed, out_path);
      std::cout << "n: " << s.n << "\nm: " << s.m
                << "\nmean_degree: " << nbt::detail::fmt_double(s.mean_degree) << "\nedges: "
                << s.edges_path << "\nlabels: " << s.labels_path << "\n";
    } else if (spec->parsed()) {
      if (sp_mode != "dense" && sp_mode != "topk") {
        std::cerr << "error: --mode must be dense or topk\n";
        return 1;
      }
      auto kind = nbt::parse_operator_kind(sp_op);
      auto s = nbt::cmd_spectrum(sp_graph, kind, sp_mode == "dense", sp_k, seed, out_path);
      std::cout << "eigenvalues: " << s.values.size() << "\nout: " << s.out_path << "\n";
      if (s.bulk_valid)
        std::cout << "bulk_radius: " << nbt::detail::fmt_double(s.bulk_radius)
                  << "\nreal_outside: " << s.real_outside << "\n";
    } else if (clu->parsed()) {
      auto kind = nbt::parse_operator_kind(cl_op);
      auto s = nbt::cmd_cluster(cl_graph, cl_q, kind, seed, out_path, cl_truth);
      std::cout << "labels: " << s.labels_path << "\nmeta: " << s.meta_path << "\n";
      if (s.has_overlap)
        std::cout << "overlap: " << nbt::detail::fmt_double(s.overlap_value) << "\n";
    } else if (bp->parsed()) {
      nbt::Graph g = nbt::load_edge_list(bp_graph);
      auto params = nbt::SbmParams::two_value(g.num_vertices(), bp_q, bp_cin, bp_cout);
      nbt::BpOpts opts;
      opts.max_sweeps = bp_sweeps;
      opts.tol = bp_tol;
      opts.damping = bp_damping;
      opts.seed = seed;
      auto s = nbt::cmd_bp(bp_graph, params, opts, out_path, bp_truth);
      std::cout << "converged: " << (s.converged ? "true" : "false") << "\nsweeps: " << s.sweeps
                << "\nlabels: " << s.labels_path << "\n";
      if (s.has_overlap)
        std::cout << "overlap: " << nbt::detail::fmt_double(s.overlap_value) << "\n";
    } else if (swp->parsed()) {
      nbt::SweepSpec sweep;
      if (sw_vary == "delta")
        sweep.vary = nbt::SweepVary::delta_at_fixed_c;
      else if (sw_vary == "c")
        sweep.vary = nbt::SweepVary::c_at_fixed_ratio;
      else {
        std::cerr << "error: --vary must be delta or c\n";
        return 1;
      }
      sweep.grid = parse_grid(sw_grid);
      sweep.n = sw_n;
      sweep.q = sw_q;
      sweep.c = sw_c;
      sweep.ratio = sw_ratio;
      sweep.seeds = sw_seeds;
      sweep.algorithms = parse_list(sw_algs);
      sweep.base_seed = seed;
      sweep.threads = threads;
      auto s = nbt::cmd_sweep(sweep, out_path);
      std::cout << "csv: " << s.csv_path << "\nagg: " << s.agg_path
                << "\nrows_written: " << s.rows_written << "\nrows_skipped: " << s.rows_skipped
                << "\n";
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
