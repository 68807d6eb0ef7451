#pragma once

// Independent reference implementations used only by tests. These stay
// deliberately naive so they cannot share bugs with the library code.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "synmind/nncore/tensor.hpp"

namespace oracles {

using synmind::nn::Tensor;

/// Solves A x = b for symmetric positive-definite A via Cholesky.
inline std::vector<double> cholesky_solve(std::vector<double> a,
                                          std::vector<double> b,
                                          std::size_t n) {
  // a is n x n row-major, overwritten with the factor.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (sum <= 0.0) throw std::runtime_error("cholesky: not SPD");
        a[i * n + j] = std::sqrt(sum);
      } else {
        a[i * n + j] = sum / a[j * n + j];
      }
    }
  }
  // Forward then backward substitution.
  for (std::size_t i = 0; i < n; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= a[i * n + k] * b[k];
    b[i] = sum / a[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double sum = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) sum -= a[k * n + ii] * b[k];
    b[ii] = sum / a[ii * n + ii];
  }
  return b;
}

/// Closed-form ridge regression: W = (X^T X + lambda I)^-1 X^T Y.
/// X: (n, p), Y: (n, q), returns W: (p, q).
inline Tensor<double> ridge_regression(const Tensor<double>& x,
                                       const Tensor<double>& y,
                                       double lambda) {
  const std::size_t n = x.dim(0), p = x.dim(1), q = y.dim(1);
  std::vector<double> gram(p * p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < p; ++a) {
      const double xa = x.at(i, a);
      for (std::size_t b = 0; b < p; ++b) gram[a * p + b] += xa * x.at(i, b);
    }
  }
  for (std::size_t a = 0; a < p; ++a) gram[a * p + a] += lambda;

  Tensor<double> w({p, q});
  for (std::size_t col = 0; col < q; ++col) {
    std::vector<double> xty(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < p; ++a) xty[a] += x.at(i, a) * y.at(i, col);
    }
    std::vector<double> sol = cholesky_solve(gram, xty, p);
    for (std::size_t a = 0; a < p; ++a) w.at(a, col) = sol[a];
  }
  return w;
}

/// Coefficient of determination of predictions against targets, pooled over
/// all output columns.
inline double r_squared(const Tensor<double>& y, const Tensor<double>& y_hat) {
  const std::size_t n = y.dim(0), q = y.dim(1);
  double mean = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) mean += y[i];
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < q; ++c) {
      const double d = y.at(i, c) - y_hat.at(i, c);
      ss_res += d * d;
      const double m = y.at(i, c) - mean;
      ss_tot += m * m;
    }
  }
  return 1.0 - ss_res / ss_tot;
}

/// Textbook Pearson correlation of two flattened arrays.
inline double pearson_reference(const double* a, const double* b,
                                std::size_t n) {
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

/// Direct-formula SSIM over every sliding uniform window, no running sums.
inline double ssim_reference(const Tensor<double>& a, const Tensor<double>& b,
                             std::size_t window, double k1, double k2,
                             double level) {
  const std::size_t h = a.dim(0), w = a.dim(1);
  const double c1 = (k1 * level) * (k1 * level);
  const double c2 = (k2 * level) * (k2 * level);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + window <= h; ++i) {
    for (std::size_t j = 0; j + window <= w; ++j) {
      double mu_a = 0.0, mu_b = 0.0;
      for (std::size_t y = 0; y < window; ++y) {
        for (std::size_t x = 0; x < window; ++x) {
          mu_a += a.at(i + y, j + x);
          mu_b += b.at(i + y, j + x);
        }
      }
      const double n = static_cast<double>(window * window);
      mu_a /= n;
      mu_b /= n;
      double var_a = 0.0, var_b = 0.0, cov = 0.0;
      for (std::size_t y = 0; y < window; ++y) {
        for (std::size_t x = 0; x < window; ++x) {
          const double da = a.at(i + y, j + x) - mu_a;
          const double db = b.at(i + y, j + x) - mu_b;
          var_a += da * da;
          var_b += db * db;
          cov += da * db;
        }
      }
      var_a /= n;
      var_b /= n;
      cov /= n;
      const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
      const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
      total += num / den;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace oracles
