#pragma once

// Test-only reference computations. Nothing here calls into the code paths
// it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "stconv/rng.hpp"
#include "stconv/tensor.hpp"

namespace stconv::testing {

/// Central finite difference of `loss` w.r.t. every entry of `values`.
inline std::vector<double> finite_difference(std::span<float> values,
                                             const std::function<double()>& loss,
                                             float eps = 1e-3f) {
  std::vector<double> grad(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float saved = values[i];
    const float up = saved + eps;
    const float down = saved - eps;
    values[i] = up;
    const double plus = loss();
    values[i] = down;
    const double minus = loss();
    values[i] = saved;
    // divide by the step actually realized in float arithmetic
    grad[i] = (plus - minus) / (static_cast<double>(up) - static_cast<double>(down));
  }
  return grad;
}

inline double max_abs_deviation(std::span<const float> analytic, const std::vector<double>& numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(analytic[i]) - numeric[i]));
  }
  return worst;
}

/// sum(output * weights) accumulated in double.
inline double weighted_sum(const Tensor& output, const Tensor& weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < output.size(); ++i) {
    total += static_cast<double>(output[i]) * weights[i];
  }
  return total;
}

/// Eigen-decomposition of a dense symmetric matrix by classical Jacobi
/// rotations (largest off-diagonal pivot each step). Eigenvalues sorted
/// descending; eigenvectors stored as columns of `vectors` (row-major n x n).
struct SymmetricEigen {
  std::vector<double> values;
  std::vector<double> vectors;
};

inline SymmetricEigen classical_jacobi(std::vector<double> a, std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  for (int iter = 0; iter < 100000; ++iter) {
    std::size_t p = 0, q = 1;
    double big = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (std::abs(a[i * n + j]) > big) {
          big = std::abs(a[i * n + j]);
          p = i;
          q = j;
        }
      }
    }
    if (big < 1e-15) break;
    const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * a[p * n + q]);
    const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
    for (std::size_t k = 0; k < n; ++k) {
      const double akp = a[k * n + p], akq = a[k * n + q];
      a[k * n + p] = c * akp - s * akq;
      a[k * n + q] = s * akp + c * akq;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double apk = a[p * n + k], aqk = a[q * n + k];
      a[p * n + k] = c * apk - s * aqk;
      a[q * n + k] = s * apk + c * aqk;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double vkp = v[k * n + p], vkq = v[k * n + q];
      v[k * n + p] = c * vkp - s * vkq;
      v[k * n + q] = s * vkp + c * vkq;
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });
  SymmetricEigen out;
  out.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values.push_back(a[order[j] * n + order[j]]);
    for (std::size_t i = 0; i < n; ++i) out.vectors[i * n + j] = v[i * n + order[j]];
  }
  return out;
}

/// Lloyd's 2-means on 2-D points seeded with the farthest pair heuristic.
inline std::vector<int> two_means(const std::vector<double>& xy) {
  const std::size_t n = xy.size() / 2;
  std::size_t a = 0, b = 0;
  double far = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::hypot(xy[2 * i] - xy[0], xy[2 * i + 1] - xy[1]);
    if (d > far) {
      far = d;
      b = i;
    }
  }
  far = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::hypot(xy[2 * i] - xy[2 * b], xy[2 * i + 1] - xy[2 * b + 1]);
    if (d > far) {
      far = d;
      a = i;
    }
  }
  double c[2][2] = {{xy[2 * a], xy[2 * a + 1]}, {xy[2 * b], xy[2 * b + 1]}};
  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d0 = std::hypot(xy[2 * i] - c[0][0], xy[2 * i + 1] - c[0][1]);
      const double d1 = std::hypot(xy[2 * i] - c[1][0], xy[2 * i + 1] - c[1][1]);
      assign[i] = d1 < d0 ? 1 : 0;
    }
    double sum[2][2] = {}, count[2] = {};
    for (std::size_t i = 0; i < n; ++i) {
      sum[assign[i]][0] += xy[2 * i];
      sum[assign[i]][1] += xy[2 * i + 1];
      count[assign[i]] += 1;
    }
    for (int k = 0; k < 2; ++k) {
      if (count[k] > 0) {
        c[k][0] = sum[k][0] / count[k];
        c[k][1] = sum[k][1] / count[k];
      }
    }
  }
  return assign;
}

/// Two-sample Kolmogorov-Smirnov test; returns the asymptotic p-value.
inline double ks_two_sample_p(std::vector<double> x, std::vector<double> y) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / x.size() - static_cast<double>(j) / y.size()));
  }
  const double ne = static_cast<double>(x.size()) * y.size() / (x.size() + y.size());
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::clamp(p, 0.0, 1.0);
}

/// Pearson chi-square statistic of counts against a uniform expectation.
inline double chi_square_uniform(const std::vector<std::size_t>& counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double chi = 0.0;
  for (auto c : counts) chi += (c - expected) * (c - expected) / expected;
  return chi;
}

/// Upper-tail p-value of a chi-square statistic (Wilson-Hilferty normal approximation).
inline double chi_square_p(double stat, double df) {
  const double h = 2.0 / (9.0 * df);
  const double z = (std::cbrt(stat / df) - (1.0 - h)) / std::sqrt(h);
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace stconv::testing
