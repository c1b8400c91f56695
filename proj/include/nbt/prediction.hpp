#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "nbt/dense_matrix.hpp"
#include "nbt/generate.hpp"

namespace nbt {

/// Closed-form spectral predictions for a block model: leading eigenvalue c,
/// community eigenvalue mu_c = c * nu (nu the leading eigenvalue of T),
/// bulk radius sqrt(c), and the detectability verdict |mu_c| > sqrt(c).
struct SpectralPrediction {
  double c = 0.0;                     // mean degree
  std::vector<double> group_degrees;  // c_a per group
  bool uniform_degrees = true;        // closed forms only apply when true
  double lambda_c = 0.0;              // adjacency second eigenvalue (q=2 two-value)
  bool lambda_c_valid = false;
  double mu_c = 0.0;                  // community eigenvalue of B
  bool mu_c_valid = false;
  double bulk_radius = 0.0;           // sqrt(c)
  bool detectable = false;
  std::vector<double> t_eigenvalues;  // real parts, descending by modulus
};

/// T_ab = n_a (c_ab / c - 1); its nonzero eigenvalues nu give B's
/// community-correlated eigenvalues mu = c nu.
inline Matrix community_matrix(const SbmParams& params) {
  params.validate();
  const int q = params.q;
  double c = params.mean_degree();
  Matrix t(static_cast<std::size_t>(q), static_cast<std::size_t>(q));
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      t(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) =
          params.group_fracs[static_cast<std::size_t>(a)] *
          (c > 0.0 ? params.affinity[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] / c - 1.0
                   : -1.0);
  return t;
}

inline SpectralPrediction predict(const SbmParams& params) {
  params.validate();
  SpectralPrediction pred;
  const int q = params.q;
  for (int a = 0; a < q; ++a) pred.group_degrees.push_back(params.group_degree(a));
  pred.c = params.mean_degree();
  pred.bulk_radius = std::sqrt(std::max(pred.c, 0.0));
  for (double ca : pred.group_degrees)
    if (std::abs(ca - pred.c) > 1e-9 * std::max(1.0, pred.c)) pred.uniform_degrees = false;

  if (pred.c > 0.0) {
    Matrix t = community_matrix(params);
    dense::hessenberg(t);
    auto ev = dense::hessenberg_eigenvalues(t);
    std::sort(ev.begin(), ev.end(),
              [](auto x, auto y) { return std::abs(x) > std::abs(y); });
    for (auto v : ev) pred.t_eigenvalues.push_back(v.real());
  } else {
    pred.t_eigenvalues.assign(static_cast<std::size_t>(q), 0.0);
  }

  if (pred.uniform_degrees && !pred.t_eigenvalues.empty()) {
    pred.mu_c = pred.c * pred.t_eigenvalues.front();
    pred.mu_c_valid = true;
    pred.detectable = std::abs(pred.mu_c) > pred.bulk_radius;
  }

  // lambda_c only has a closed form for the two-value q=2 case.
  if (q == 2 && pred.uniform_degrees) {
    double c_in = params.affinity[0][0];
    double c_out = params.affinity[0][1];
    if (std::abs(params.affinity[1][1] - c_in) < 1e-12 && c_in != c_out) {
      pred.lambda_c = 0.5 * (c_in - c_out) + (c_in + c_out) / (c_in - c_out);
      pred.lambda_c_valid = true;
    }
  }
  return pred;
}

}  // namespace nbt
