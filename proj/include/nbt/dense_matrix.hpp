#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nbt/rng.hpp"

namespace nbt {

/// Small dense row-major matrix. Sized for oracle work (dim <= 5000), not a
/// general linear-algebra type.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Matrix transposed() const {
    Matrix t(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix operator*(const Matrix& o) const {
    if (cols != o.rows) throw std::invalid_argument("Matrix multiply: shape mismatch");
    Matrix r(rows, o.cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t k = 0; k < cols; ++k) {
        double v = (*this)(i, k);
        if (v == 0.0) continue;
        for (std::size_t j = 0; j < o.cols; ++j) r(i, j) += v * o(k, j);
      }
    return r;
  }
};

namespace dense {

/// In-place Householder reduction to upper Hessenberg form. If q is given it
/// receives the orthogonal transform: A_in = q * H * q^T.
inline void hessenberg(Matrix& h, Matrix* q = nullptr) {
  const std::size_t n = h.rows;
  if (q) *q = Matrix::identity(n);
  if (n < 3) return;
  std::vector<double> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double scale = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) scale += std::abs(h(i, k));
    if (scale == 0.0) continue;
    double norm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = h(i, k) / scale;
      norm2 += v[i] * v[i];
    }
    double alpha = std::sqrt(norm2);
    if (v[k + 1] > 0.0) alpha = -alpha;
    v[k + 1] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0.0) continue;
    // Left: H <- (I - 2 v v^T / v^T v) H
    for (std::size_t j = k; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) dot += v[i] * h(i, j);
      dot = 2.0 * dot / vnorm2;
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= dot * v[i];
    }
    // Right: H <- H (I - 2 v v^T / v^T v)
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) dot += h(i, j) * v[j];
      dot = 2.0 * dot / vnorm2;
      for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= dot * v[j];
    }
    if (q) {
      for (std::size_t i = 0; i < n; ++i) {
        double dot = 0.0;
        for (std::size_t j = k + 1; j < n; ++j) dot += (*q)(i, j) * v[j];
        dot = 2.0 * dot / vnorm2;
        for (std::size_t j = k + 1; j < n; ++j) (*q)(i, j) -= dot * v[j];
      }
    }
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
}

/// Eigenvalues of an upper Hessenberg matrix by implicitly-shifted
/// double-shift (Francis) QR iteration. Destroys h.
inline std::vector<std::complex<double>> hessenberg_eigenvalues(Matrix& h) {
  const long n = static_cast<long>(h.rows);
  std::vector<std::complex<double>> ev(static_cast<std::size_t>(n));
  if (n == 0) return ev;
  const double eps = std::numeric_limits<double>::epsilon();
  auto a = [&](long i, long j) -> double& {
    return h(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  };
  auto sign = [](double v, double ref) { return ref >= 0.0 ? std::abs(v) : -std::abs(v); };

  double anorm = 0.0;
  for (long i = 0; i < n; ++i)
    for (long j = std::max(i - 1, 0L); j < n; ++j) anorm += std::abs(a(i, j));
  if (anorm == 0.0) anorm = 1.0;

  long sweeps = 0;
  const long sweep_cap = 30 * n;
  long nn = n - 1;
  double t = 0.0;
  while (nn >= 0) {
    long its = 0;
    long l = 0;
    do {
      for (l = nn; l >= 1; --l) {
        double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      if (l < 0) l = 0;
      double x = a(nn, nn);
      if (l == nn) {
        ev[static_cast<std::size_t>(nn--)] = x + t;
      } else {
        double y = a(nn - 1, nn - 1);
        double w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          double p = 0.5 * (y - x);
          double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign(z, p);
            double e1 = x + z;
            double e2 = (z != 0.0) ? x - w / z : x + z;
            ev[static_cast<std::size_t>(nn - 1)] = e1;
            ev[static_cast<std::size_t>(nn)] = e2;
          } else {
            ev[static_cast<std::size_t>(nn - 1)] = std::complex<double>(x + p, z);
            ev[static_cast<std::size_t>(nn)] = std::complex<double>(x + p, -z);
          }
          nn -= 2;
        } else {
          if (++sweeps > sweep_cap)
            throw std::runtime_error("dense_spectrum: QR failed to converge on block [" +
                                     std::to_string(l) + ", " + std::to_string(nn) + "]");
          if (its == 10 || its == 20) {
            t += x;
            for (long i = 0; i <= nn; ++i) a(i, i) -= x;
            double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          long m;
          double p = 0.0, q = 0.0, r = 0.0;
          for (m = nn - 2; m >= l; --m) {
            double z = a(m, m);
            double rr = x - z;
            double ss = y - z;
            p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - rr - ss;
            r = a(m + 2, m + 1);
            double s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            double v = std::abs(p) *
                       (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (long i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          // Bulge chase across the active window.
          for (long k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = (k != nn - 1) ? a(k + 2, k - 1) : 0.0;
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            double s = sign(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            double z = r / s;
            q /= p;
            r /= p;
            for (long j = k; j <= nn; ++j) {
              double pj = a(k, j) + q * a(k + 1, j);
              if (k != nn - 1) {
                pj += r * a(k + 2, j);
                a(k + 2, j) -= pj * z;
              }
              a(k + 1, j) -= pj * y;
              a(k, j) -= pj * x;
            }
            long mmin = nn < k + 3 ? nn : k + 3;
            for (long i = l; i <= mmin; ++i) {
              double pi = x * a(i, k) + y * a(i, k + 1);
              if (k != nn - 1) {
                pi += z * a(i, k + 2);
                a(i, k + 2) -= pi * r;
              }
              a(i, k + 1) -= pi * q;
              a(i, k) -= pi;
            }
          }
        }
      }
    } while (nn >= 0 && l < nn - 1);
  }
  return ev;
}

/// Solve (H - shift*I) x = b for upper Hessenberg H by complex Gaussian
/// elimination with partial pivoting; O(n^2) thanks to the single subdiagonal.
inline void hessenberg_shifted_solve(const Matrix& hess, std::complex<double> shift,
                                     std::vector<std::complex<double>>& b) {
  const std::size_t n = hess.rows;
  std::vector<std::complex<double>> m(n * n, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> std::complex<double>& { return m[i * n + j]; };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i == 0 ? 0 : i - 1); j < n; ++j)
      at(i, j) = hess(i, j) - (i == j ? shift : 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    // Only one candidate below the diagonal.
    if (std::abs(at(k + 1, k)) > std::abs(at(k, k))) {
      for (std::size_t j = k; j < n; ++j) std::swap(at(k, j), at(k + 1, j));
      std::swap(b[k], b[k + 1]);
    }
    std::complex<double> piv = at(k, k);
    if (piv == 0.0) piv = at(k, k) = 1e-300;
    std::complex<double> f = at(k + 1, k) / piv;
    if (f != 0.0) {
      for (std::size_t j = k; j < n; ++j) at(k + 1, j) -= f * at(k, j);
      b[k + 1] -= f * b[k];
    }
  }
  for (std::size_t ii = n; ii-- > 0;) {
    std::complex<double> s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= at(ii, j) * b[j];
    std::complex<double> piv = at(ii, ii);
    if (piv == 0.0) piv = 1e-300;
    b[ii] = s / piv;
  }
}

/// Eigenvector of the original matrix for eigenvalue mu, by inverse
/// iteration on the Hessenberg form followed by back-transformation with q.
inline std::vector<std::complex<double>> hessenberg_eigenvector(const Matrix& hess, const Matrix& q,
                                                               std::complex<double> mu,
                                                               std::uint64_t seed = 12345) {
  const std::size_t n = hess.rows;
  Rng rng(seed);
  std::vector<std::complex<double>> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::complex<double>(rng.normal(), rng.normal());
  // Tiny shift perturbation keeps the solve nonsingular at an exact eigenvalue.
  double scale = std::max(1.0, std::abs(mu));
  std::complex<double> shift = mu + std::complex<double>(scale * 1e-13, 0.0);
  for (int iter = 0; iter < 3; ++iter) {
    hessenberg_shifted_solve(hess, shift, x);
    double norm = 0.0;
    for (auto& v : x) norm += std::norm(v);
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    for (auto& v : x) v /= norm;
  }
  // Back-transform and fix the phase so results are deterministic.
  std::vector<std::complex<double>> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i] += q(i, j) * x[j];
  }
  std::size_t imax = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(out[i]) > std::abs(out[imax])) imax = i;
  if (std::abs(out[imax]) > 0.0) {
    std::complex<double> phase = out[imax] / std::abs(out[imax]);
    for (auto& v : out) v /= phase;
  }
  return out;
}

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column j pairs with values[j]
};

/// Cyclic Jacobi rotations for a symmetric matrix; sweeps until the
/// off-diagonal Frobenius mass drops below 1e-14 of the total.
inline SymmetricEigen jacobi_symmetric(Matrix a, bool with_vectors = true) {
  const std::size_t n = a.rows;
  if (a.cols != n) throw std::invalid_argument("jacobi_symmetric: not square");
  double amax = 0.0;
  for (double v : a.a) amax = std::max(amax, std::abs(v));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-12 * std::max(1.0, amax))
        throw std::invalid_argument("jacobi_symmetric: input not symmetric");

  Matrix v = with_vectors ? Matrix::identity(n) : Matrix();
  double total = 0.0;
  for (double x : a.a) total += x * x;
  total = std::sqrt(total);
  if (total == 0.0) total = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    if (std::sqrt(off) < 1e-14 * total) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        if (with_vectors) {
          for (std::size_t k = 0; k < n; ++k) {
            double vkp = v(k, p), vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }
  SymmetricEigen res;
  res.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.values[i] = a(i, i);
  // Sort ascending, permuting vectors along.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return res.values[x] < res.values[y]; });
  SymmetricEigen sorted;
  sorted.values.resize(n);
  if (with_vectors) sorted.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    sorted.values[j] = res.values[order[j]];
    if (with_vectors)
      for (std::size_t i = 0; i < n; ++i) sorted.vectors(i, j) = v(i, order[j]);
  }
  return sorted;
}

}  // namespace dense
}  // namespace nbt
