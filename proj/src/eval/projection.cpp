#include "stconv/eval/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stconv/error.hpp"
#include "stconv/rng.hpp"

namespace stconv::eval {

EigenPairs jacobi_eigen(std::vector<double> a, std::size_t n) {
  require(a.size() == n * n && n >= 1, ErrorCode::invalid_shape, "jacobi needs an n x n matrix");
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  double total = 0.0;
  for (double x : a) total += x * x;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off <= 1e-30 * total || off == 0.0) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double kp = a[k * n + p], kq = a[k * n + q];
          a[k * n + p] = c * kp - s * kq;
          a[k * n + q] = s * kp + c * kq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double pk = a[p * n + k], qk = a[q * n + k];
          a[p * n + k] = c * pk - s * qk;
          a[q * n + k] = s * pk + c * qk;
        }
        a[p * n + q] = a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double kp = v[k * n + p], kq = v[k * n + q];
          v[k * n + p] = c * kp - s * kq;
          v[k * n + q] = s * kp + c * kq;
        }
      }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });
  EigenPairs out;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.values[j] = a[src * n + src];
    // sign: largest-magnitude entry positive
    std::size_t big = 0;
    for (std::size_t k = 1; k < n; ++k)
      if (std::abs(v[k * n + src]) > std::abs(v[big * n + src])) big = k;
    const double sign = v[big * n + src] < 0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < n; ++k) out.vectors[k * n + j] = sign * v[k * n + src];
  }
  return out;
}

PcaResult project_pca(const Tensor& features, std::size_t out_dims) {
  require(features.rank() == 2, ErrorCode::invalid_shape, "pca input must be N x D");
  const std::size_t N = features.dim(0), D = features.dim(1);
  require(N >= 2, ErrorCode::insufficient_data, "pca needs at least 2 rows");
  require(out_dims >= 1 && out_dims <= D, ErrorCode::invalid_config,
          "pca output dimensions must be in [1, D]");

  std::vector<double> x(N * D);
  for (std::size_t j = 0; j < D; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < N; ++i) m += features[i * D + j];
    m /= static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) x[i * D + j] = features[i * D + j] - m;
  }
  double total = 0.0;
  for (double v : x) total += v * v;
  total /= static_cast<double>(N - 1);
  require(total > 0.0, ErrorCode::degenerate, "all rows are identical");

  std::vector<std::vector<double>> axes;  // unit vectors in R^D
  std::vector<double> variances;
  if (N < D) {
    std::vector<double> g(N * N);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = i; k < N; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < D; ++j) s += x[i * D + j] * x[k * D + j];
        g[i * N + k] = g[k * N + i] = s;
      }
    const EigenPairs e = jacobi_eigen(std::move(g), N);
    for (std::size_t c = 0; c < out_dims && c < N; ++c) {
      const double lambda = e.values[c];
      variances.push_back(std::max(0.0, lambda) / static_cast<double>(N - 1));
      if (lambda <= 1e-12 * e.values[0]) break;
      std::vector<double> axis(D, 0.0);
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < D; ++j) axis[j] += x[i * D + j] * e.vectors[i * N + c];
      const double inv = 1.0 / std::sqrt(lambda);
      for (double& v : axis) v *= inv;
      axes.push_back(std::move(axis));
    }
  } else {
    std::vector<double> cov(D * D, 0.0);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < D; ++j)
        for (std::size_t k = j; k < D; ++k) cov[j * D + k] += x[i * D + j] * x[i * D + k];
    for (std::size_t j = 0; j < D; ++j)
      for (std::size_t k = j; k < D; ++k) cov[k * D + j] = cov[j * D + k] /= static_cast<double>(N - 1);
    const EigenPairs e = jacobi_eigen(std::move(cov), D);
    for (std::size_t c = 0; c < out_dims; ++c) {
      variances.push_back(std::max(0.0, e.values[c]));
      std::vector<double> axis(D);
      for (std::size_t j = 0; j < D; ++j) axis[j] = e.vectors[j * D + c];
      axes.push_back(std::move(axis));
    }
  }
  variances.resize(out_dims, 0.0);
  // complete a rank-deficient basis with Gram-Schmidt over the unit vectors
  for (std::size_t basis = 0; axes.size() < out_dims && basis < D; ++basis) {
    std::vector<double> e(D, 0.0);
    e[basis] = 1.0;
    for (const auto& a : axes) {
      double d = 0.0;
      for (std::size_t j = 0; j < D; ++j) d += a[j] * e[j];
      for (std::size_t j = 0; j < D; ++j) e[j] -= d * a[j];
    }
    double norm = 0.0;
    for (double v : e) norm += v * v;
    if (norm < 1e-6) continue;
    for (double& v : e) v /= std::sqrt(norm);
    axes.push_back(std::move(e));
  }

  PcaResult r;
  r.components = Tensor({out_dims, D});
  r.projection = Tensor({N, out_dims});
  for (std::size_t c = 0; c < out_dims; ++c) {
    for (std::size_t j = 0; j < D; ++j) r.components[c * D + j] = static_cast<float>(axes[c][j]);
    for (std::size_t i = 0; i < N; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < D; ++j) s += x[i * D + j] * axes[c][j];
      r.projection[i * out_dims + c] = static_cast<float>(s);
    }
    r.variances.push_back(variances[c]);
    r.explained_ratio.push_back(std::min(1.0, variances[c] / total));
  }
  return r;
}

namespace {

std::vector<double> squared_distances(const Tensor& f) {
  const std::size_t N = f.dim(0), D = f.dim(1);
  std::vector<double> d(N * N, 0.0);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < D; ++k) {
        const double t = static_cast<double>(f[i * D + k]) - f[j * D + k];
        s += t * t;
      }
      d[i * N + j] = d[j * N + i] = s;
    }
  return d;
}

}  // namespace

TsneAffinities tsne_affinities(const Tensor& features, double perplexity) {
  require(features.rank() == 2, ErrorCode::invalid_shape, "t-SNE input must be N x D");
  const std::size_t N = features.dim(0);
  require(perplexity >= 1.0 && perplexity < static_cast<double>(N), ErrorCode::invalid_config,
          "perplexity must satisfy 1 <= perplexity < N");
  const std::vector<double> dist = squared_distances(features);
  const double target = std::log(perplexity);
  TsneAffinities a;
  a.n = N;
  a.conditional.assign(N * N, 0.0);
  a.row_entropy.resize(N);
  std::vector<double> p(N);
  for (std::size_t i = 0; i < N; ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < N; ++j)
      if (j != i) dmin = std::min(dmin, dist[i * N + j]);
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double entropy = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      double sum = 0.0, weighted = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        const double shifted = dist[i * N + j] - dmin;
        p[j] = j == i ? 0.0 : std::exp(-beta * shifted);
        sum += p[j];
        weighted += p[j] * shifted;
      }
      entropy = std::log(sum) + beta * weighted / sum;
      for (auto& v : p) v /= sum;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    a.row_entropy[i] = entropy;
    std::copy(p.begin(), p.end(), a.conditional.begin() + static_cast<std::ptrdiff_t>(i * N));
  }
  a.joint.assign(N * N, 0.0);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      a.joint[i * N + j] = (a.conditional[i * N + j] + a.conditional[j * N + i]) / (2.0 * N);
    }
  return a;
}

Tensor project_tsne(const Tensor& features, const TsneConfig& cfg) {
  require(cfg.iterations >= 1 && cfg.learning_rate > 0.0, ErrorCode::invalid_config,
          "t-SNE needs iterations >= 1 and a positive learning rate");
  const TsneAffinities aff = tsne_affinities(features, cfg.perplexity);
  const std::size_t N = aff.n;
  std::vector<double> P(aff.joint);
  for (double& v : P) v = std::max(v, 1e-12);

  Rng rng(cfg.seed);
  std::vector<double> y(2 * N), update(2 * N, 0.0), gains(2 * N, 1.0), grad(2 * N);
  for (double& v : y) v = 1e-4 * rng.normal();
  std::vector<double> num(N * N);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const double exag = it < cfg.exaggeration_iters ? cfg.exaggeration : 1.0;
    const double mom = it < cfg.momentum_switch ? cfg.momentum : cfg.final_momentum;
    double z = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      num[i * N + i] = 0.0;
      for (std::size_t j = i + 1; j < N; ++j) {
        const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
        const double q = 1.0 / (1.0 + dx * dx + dy * dy);
        num[i * N + j] = num[j * N + i] = q;
        z += 2.0 * q;
      }
    }
    for (std::size_t i = 0; i < N; ++i) {
      double gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        if (j == i) continue;
        const double q = num[i * N + j];
        const double m = (exag * P[i * N + j] - q / z) * q;
        gx += m * (y[2 * i] - y[2 * j]);
        gy += m * (y[2 * i + 1] - y[2 * j + 1]);
      }
      grad[2 * i] = 4.0 * gx;
      grad[2 * i + 1] = 4.0 * gy;
    }
    for (std::size_t k = 0; k < 2 * N; ++k) {
      gains[k] = (grad[k] > 0) != (update[k] > 0) ? gains[k] + 0.2 : gains[k] * 0.8;
      gains[k] = std::max(gains[k], 0.01);
      update[k] = mom * update[k] - cfg.learning_rate * gains[k] * grad[k];
      y[k] += update[k];
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      mx += y[2 * i];
      my += y[2 * i + 1];
    }
    mx /= static_cast<double>(N);
    my /= static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) {
      y[2 * i] -= mx;
      y[2 * i + 1] -= my;
    }
  }
  Tensor out({N, 2});
  for (std::size_t k = 0; k < 2 * N; ++k) out[k] = static_cast<float>(y[k]);
  require(out.all_finite(), ErrorCode::degenerate, "t-SNE diverged");
  return out;
}

}  // namespace stconv::eval
