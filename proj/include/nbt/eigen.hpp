#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nbt/dense_matrix.hpp"
#include "nbt/operators.hpp"
#include "nbt/rng.hpp"

namespace nbt {

/// Eigenvalues sorted by descending modulus, optional eigenvectors, and the
/// relative residual ||Op v - mu v|| / ||v|| for each returned pair.
struct EigenResult {
  std::vector<std::complex<double>> values;
  std::vector<std::vector<std::complex<double>>> vectors;
  std::vector<double> residuals;
  std::vector<char> converged;
  int iterations = 0;

  bool all_converged() const {
    for (char c : converged)
      if (!c) return false;
    return true;
  }
};

struct SolverOpts {
  int k = 1;
  double tol = 1e-8;
  int max_iter = 300;      // restart cycles
  int subspace = 0;        // 0 -> max(2k+2, 20)
  std::uint64_t seed = 1;
};

namespace detail {

inline double residual_norm(const OperatorHandle& op, std::complex<double> mu,
                            const std::vector<std::complex<double>>& v) {
  const std::size_t n = op.dim();
  std::vector<double> re(n), im(n), are(n), aim(n);
  double vnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = v[i].real();
    im[i] = v[i].imag();
    vnorm += std::norm(v[i]);
  }
  vnorm = std::sqrt(vnorm);
  if (vnorm == 0.0) return 0.0;
  op.apply(re.data(), are.data());
  op.apply(im.data(), aim.data());
  double rnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::complex<double> r = std::complex<double>(are[i], aim[i]) - mu * v[i];
    rnorm += std::norm(r);
  }
  return std::sqrt(rnorm) / vnorm;
}

struct SmallEig {
  std::vector<std::complex<double>> values;
  std::vector<std::vector<std::complex<double>>> vectors;  // unit norm
};

/// Full eigendecomposition of a small dense matrix (values + vectors).
inline SmallEig small_eig(const Matrix& m, std::uint64_t seed) {
  Matrix h = m;
  Matrix q;
  dense::hessenberg(h, &q);
  Matrix hwork = h;
  SmallEig out;
  out.values = dense::hessenberg_eigenvalues(hwork);
  out.vectors.reserve(out.values.size());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    auto v = dense::hessenberg_eigenvector(h, q, out.values[i], derive_seed(seed, i));
    double norm = 0.0;
    for (auto& c : v) norm += std::norm(c);
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (auto& c : v) c /= norm;
    out.vectors.push_back(std::move(v));
  }
  return out;
}

}  // namespace detail

/// Full complex spectrum of a small operator through the dense oracle path:
/// materialize, reduce to Hessenberg form, Francis QR; eigenvectors on
/// demand by inverse iteration on the Hessenberg form.
inline EigenResult dense_spectrum(const OperatorHandle& op, bool with_vectors = false) {
  if (op.dim() > 5000) throw std::invalid_argument("dense_spectrum: dim exceeds 5000");
  Matrix a = materialize(op);
  Matrix q;
  dense::hessenberg(a, with_vectors ? &q : nullptr);
  Matrix hwork = a;
  auto values = dense::hessenberg_eigenvalues(hwork);

  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (std::abs(values[x]) != std::abs(values[y])) return std::abs(values[x]) > std::abs(values[y]);
    if (values[x].real() != values[y].real()) return values[x].real() > values[y].real();
    return values[x].imag() > values[y].imag();
  });

  EigenResult res;
  res.iterations = 1;
  for (std::size_t idx : order) {
    res.values.push_back(values[idx]);
    res.converged.push_back(1);
  }
  if (with_vectors) {
    for (std::size_t i = 0; i < res.values.size(); ++i) {
      auto v = dense::hessenberg_eigenvector(a, q, res.values[i], derive_seed(7, i));
      res.residuals.push_back(detail::residual_norm(op, res.values[i], v));
      res.vectors.push_back(std::move(v));
    }
  }
  return res;
}

/// Real eigenvalues of a symmetric matrix, descending, via cyclic Jacobi.
inline std::vector<double> dense_symmetric_spectrum(const Matrix& m) {
  auto eig = dense::jacobi_symmetric(m, false);
  std::reverse(eig.values.begin(), eig.values.end());
  return eig.values;
}

/// Leading eigenpairs of a large operator: real-arithmetic Arnoldi with
/// thick restarts (2k Ritz vectors kept). Deterministic given the seed.
inline EigenResult topk_eigs(const OperatorHandle& op, const SolverOpts& opts) {
  const std::size_t dim = op.dim();
  const int k = opts.k;
  if (k < 1) throw std::invalid_argument("topk_eigs: k must be >= 1");
  if (static_cast<std::size_t>(k) >= dim) throw std::invalid_argument("topk_eigs: k must be < dim");
  int m = opts.subspace > 0 ? opts.subspace : std::max(2 * k + 2, 20);
  if (m < 2 * k + 2) throw std::invalid_argument("topk_eigs: subspace must be >= 2k+2");
  m = std::min<int>(m, static_cast<int>(dim));

  Rng rng(opts.seed);
  auto random_unit = [&](std::size_t n) {
    std::vector<double> v(n);
    double norm = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
  };

  std::vector<std::vector<double>> V(static_cast<std::size_t>(m) + 1,
                                     std::vector<double>(dim, 0.0));
  Matrix M(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
  std::vector<double> vres = random_unit(dim);
  std::vector<double> spike;  // A V_p = V_p M_p + vres spike^T
  int p = 0;
  double beta = 0.0;
  EigenResult best;

  auto dot = [dim](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
  };

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    // Expansion: Arnoldi steps from column p to m-1, double modified
    // Gram-Schmidt for stable orthogonality.
    V[static_cast<std::size_t>(p)] = vres;
    for (int c = 0; c < p; ++c) M(static_cast<std::size_t>(p), static_cast<std::size_t>(c)) = spike[static_cast<std::size_t>(c)];
    for (int j = p; j < m; ++j) {
      std::vector<double> w(dim);
      op.apply(V[static_cast<std::size_t>(j)].data(), w.data());
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          double h = dot(V[static_cast<std::size_t>(i)], w);
          for (std::size_t t = 0; t < dim; ++t) w[t] -= h * V[static_cast<std::size_t>(i)][t];
          M(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) += h;
        }
      }
      beta = std::sqrt(dot(w, w));
      if (beta < 1e-13) {
        // Lucky breakdown: restart the residual direction at random.
        w = random_unit(dim);
        for (int pass = 0; pass < 2; ++pass)
          for (int i = 0; i <= j; ++i) {
            double h = dot(V[static_cast<std::size_t>(i)], w);
            for (std::size_t t = 0; t < dim; ++t) w[t] -= h * V[static_cast<std::size_t>(i)][t];
          }
        double nw = std::sqrt(dot(w, w));
        if (nw > 1e-13)
          for (auto& x : w) x /= nw;
        beta = 0.0;
      } else {
        for (auto& x : w) x /= beta;
      }
      if (j + 1 < m) M(static_cast<std::size_t>(j) + 1, static_cast<std::size_t>(j)) = beta;
      V[static_cast<std::size_t>(j) + 1] = std::move(w);
    }
    // A V_m = V_m M + V[m] beta e_{m-1}^T.
    auto eig = detail::small_eig(M, derive_seed(opts.seed, static_cast<std::uint64_t>(iter)));
    std::vector<std::size_t> order(eig.values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (std::abs(eig.values[x]) != std::abs(eig.values[y]))
        return std::abs(eig.values[x]) > std::abs(eig.values[y]);
      if (eig.values[x].real() != eig.values[y].real())
        return eig.values[x].real() > eig.values[y].real();
      return eig.values[x].imag() > eig.values[y].imag();
    });
    auto est_residual = [&](std::size_t idx) {
      return beta * std::abs(eig.vectors[idx][static_cast<std::size_t>(m) - 1]);
    };

    bool estimated_ok = true;
    for (int i = 0; i < k; ++i) {
      std::size_t idx = order[static_cast<std::size_t>(i)];
      if (est_residual(idx) > opts.tol * std::max(1.0, std::abs(eig.values[idx])))
        estimated_ok = false;
    }

    auto build_result = [&](bool final_call) {
      EigenResult res;
      res.iterations = iter;
      for (int i = 0; i < k; ++i) {
        std::size_t idx = order[static_cast<std::size_t>(i)];
        std::vector<std::complex<double>> x(dim, 0.0);
        for (int j = 0; j < m; ++j) {
          std::complex<double> yj = eig.vectors[idx][static_cast<std::size_t>(j)];
          if (yj == 0.0) continue;
          const auto& col = V[static_cast<std::size_t>(j)];
          for (std::size_t t = 0; t < dim; ++t) x[t] += yj * col[t];
        }
        double norm = 0.0;
        for (auto& c : x) norm += std::norm(c);
        norm = std::sqrt(norm);
        if (norm > 0.0)
          for (auto& c : x) c /= norm;
        double rexact = detail::residual_norm(op, eig.values[idx], x);
        res.values.push_back(eig.values[idx]);
        res.vectors.push_back(std::move(x));
        res.residuals.push_back(rexact);
        res.converged.push_back(rexact <= opts.tol * std::max(1.0, std::abs(eig.values[idx])) ? 1 : 0);
      }
      (void)final_call;
      return res;
    };

    if (estimated_ok || iter == opts.max_iter || m == static_cast<int>(dim)) {
      EigenResult res = build_result(iter == opts.max_iter);
      if (res.all_converged() || iter == opts.max_iter || m == static_cast<int>(dim)) return res;
      best = std::move(res);  // keep going; estimates were optimistic
    }

    // Thick restart: keep ~2k Ritz vectors, never splitting a conjugate pair.
    int keep = std::min(2 * k, m - 2);
    if (keep < 1) keep = 1;
    if (eig.values[order[static_cast<std::size_t>(keep) - 1]].imag() != 0.0 &&
        keep < m - 1 &&
        std::abs(eig.values[order[static_cast<std::size_t>(keep)]] -
                 std::conj(eig.values[order[static_cast<std::size_t>(keep) - 1]])) <
            1e-12 * std::max(1.0, std::abs(eig.values[order[static_cast<std::size_t>(keep) - 1]])))
      ++keep;

    // Real basis of the kept (approximate) invariant subspace.
    std::vector<std::vector<double>> Y;  // columns, length m
    for (int i = 0; i < keep; ++i) {
      std::size_t idx = order[static_cast<std::size_t>(i)];
      std::vector<double> re(static_cast<std::size_t>(m)), im(static_cast<std::size_t>(m));
      bool has_im = false;
      for (int j = 0; j < m; ++j) {
        re[static_cast<std::size_t>(j)] = eig.vectors[idx][static_cast<std::size_t>(j)].real();
        im[static_cast<std::size_t>(j)] = eig.vectors[idx][static_cast<std::size_t>(j)].imag();
        if (im[static_cast<std::size_t>(j)] != 0.0) has_im = true;
      }
      Y.push_back(std::move(re));
      if (has_im && eig.values[idx].imag() > 0.0) Y.push_back(std::move(im));
    }
    // Orthonormalize columns (MGS, twice), dropping rank-deficient ones.
    std::vector<std::vector<double>> Q;
    for (auto& col : Y) {
      for (int pass = 0; pass < 2; ++pass)
        for (auto& qc : Q) {
          double h = 0.0;
          for (int j = 0; j < m; ++j) h += qc[static_cast<std::size_t>(j)] * col[static_cast<std::size_t>(j)];
          for (int j = 0; j < m; ++j) col[static_cast<std::size_t>(j)] -= h * qc[static_cast<std::size_t>(j)];
        }
      double norm = 0.0;
      for (double x : col) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 1e-10) {
        for (double& x : col) x /= norm;
        Q.push_back(col);
      }
    }
    if (Q.empty()) Q.push_back([&] {
      std::vector<double> e(static_cast<std::size_t>(m), 0.0);
      e[0] = 1.0;
      return e;
    }());
    int pnew = static_cast<int>(Q.size());

    // V_p = V_m Q, M_p = Q^T M Q, spike = beta * (row m-1 of Q).
    std::vector<std::vector<double>> Vnew(static_cast<std::size_t>(pnew),
                                          std::vector<double>(dim, 0.0));
    for (int c = 0; c < pnew; ++c)
      for (int j = 0; j < m; ++j) {
        double w = Q[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
        if (w == 0.0) continue;
        const auto& col = V[static_cast<std::size_t>(j)];
        for (std::size_t t = 0; t < dim; ++t) Vnew[static_cast<std::size_t>(c)][t] += w * col[t];
      }
    Matrix Mnew(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
    for (int r = 0; r < pnew; ++r)
      for (int c = 0; c < pnew; ++c) {
        double s = 0.0;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j)
            s += Q[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] *
                 M(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
                 Q[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
        Mnew(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = s;
      }
    spike.assign(static_cast<std::size_t>(pnew), 0.0);
    for (int c = 0; c < pnew; ++c)
      spike[static_cast<std::size_t>(c)] =
          beta * Q[static_cast<std::size_t>(c)][static_cast<std::size_t>(m) - 1];
    vres = V[static_cast<std::size_t>(m)];
    for (int c = 0; c < pnew; ++c) V[static_cast<std::size_t>(c)] = std::move(Vnew[static_cast<std::size_t>(c)]);
    M = std::move(Mnew);
    p = pnew;
  }
  return best;
}

struct BulkEstimate {
  double bulk_radius = 0.0;
  std::vector<double> real_outside;  // descending modulus, leading included
  int q_estimate = 0;
};

/// Count real eigenvalues outside the estimated bulk radius sqrt(mu_1);
/// their number is the natural estimate for the community count q.
inline BulkEstimate real_eigs_outside_bulk(const EigenResult& res, double delta = 0.02) {
  if (res.values.empty()) throw std::invalid_argument("real_eigs_outside_bulk: empty result");
  auto mu1 = res.values.front();
  auto is_real = [](std::complex<double> v) {
    return std::abs(v.imag()) <= 1e-6 * std::max(1.0, std::abs(v));
  };
  if (!is_real(mu1) || mu1.real() <= 0.0)
    throw std::runtime_error("real_eigs_outside_bulk: leading eigenvalue not real positive");
  BulkEstimate est;
  est.bulk_radius = std::sqrt(mu1.real());
  for (auto v : res.values)
    if (is_real(v) && std::abs(v) > est.bulk_radius * (1.0 + delta))
      est.real_outside.push_back(v.real());
  est.q_estimate = static_cast<int>(est.real_outside.size());
  return est;
}

}  // namespace nbt
