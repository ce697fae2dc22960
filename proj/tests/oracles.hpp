// Reference computations used by the unit tests and the acceptance binary.
// None of these call into the library's numerical code.

#pragma once

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

namespace oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Big = boost::multiprecision::cpp_bin_float_50;

inline Big big_phi(const Big& x) {
  return boost::math::erfc(-x / boost::multiprecision::sqrt(Big(2))) / 2;
}

/// theta_k = Phi(eta_k) prod_{j != k} Phi(-eta_j), normalized, in 50 digits.
inline std::vector<Big> theta_extended(const std::vector<double>& eta) {
  const std::size_t k = eta.size();
  std::vector<Big> up(k), down(k), num(k);
  for (std::size_t i = 0; i < k; ++i) {
    up[i] = big_phi(Big(eta[i]));
    down[i] = big_phi(-Big(eta[i]));
  }
  Big total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    Big p = up[i];
    for (std::size_t j = 0; j < k; ++j)
      if (j != i) p *= down[j];
    num[i] = p;
    total += p;
  }
  for (auto& v : num) v /= total;
  return num;
}

inline double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double theta2_first(double e0, double e1) {
  const double a = phi_cdf(e0) * phi_cdf(-e1);
  const double b = phi_cdf(-e0) * phi_cdf(e1);
  return a / (a + b);
}

/// Posterior moments of eta given Y written out with X = 1_N (x) I_K,
/// A = I and row-wise vec(Y), inverted by full-pivot LU.
struct Moments {
  Vector mean;
  Matrix cov;
};

inline Moments literal_eta_moments(const Matrix& y, const Vector& mu, const Matrix& sigma) {
  const Eigen::Index n = y.rows(), k = y.cols();
  Matrix x = Matrix::Zero(n * k, k);
  Vector vec_y(n * k);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < k; ++c) {
      x(r * k + c, c) = 1.0;
      vec_y[r * k + c] = y(r, c);
    }
  const Matrix a_inv = Matrix::Identity(n * k, n * k);
  const Matrix sigma_inv = sigma.fullPivLu().inverse();
  const Matrix cov = (sigma_inv + x.transpose() * a_inv * x).fullPivLu().inverse();
  return {cov * (sigma_inv * mu + x.transpose() * a_inv * vec_y), cov};
}

/// Square bins of width `width` on [lo, lo + bins*width)^2 plus one
/// overflow cell (index bins*bins).
struct Grid2 {
  double lo = -6.0, width = 0.5;
  int bins = 24;

  int cell(double a, double b) const {
    const int i = static_cast<int>(std::floor((a - lo) / width));
    const int j = static_cast<int>(std::floor((b - lo) / width));
    if (i < 0 || i >= bins || j < 0 || j >= bins) return bins * bins;
    return i * bins + j;
  }
  int cells() const { return bins * bins + 1; }
};

/// Cell probabilities of the density proportional to
/// N(eta; mu, sigma) * theta_label(eta) for K = 2, integrated by the
/// midpoint rule on a step-`h` lattice over [-span, span]^2.
inline std::vector<double> k2_posterior_cells(const Vector& mu, const Matrix& sigma, int label,
                                              const Grid2& grid, double h = 0.02,
                                              double span = 16.0) {
  const Matrix prec = sigma.inverse();
  std::vector<double> mass(grid.cells(), 0.0);
  double total = 0.0;
  const int steps = static_cast<int>(std::round(2.0 * span / h));
  for (int i = 0; i < steps; ++i)
    for (int j = 0; j < steps; ++j) {
      const double a = -span + (i + 0.5) * h, b = -span + (j + 0.5) * h;
      const double d0 = a - mu[0], d1 = b - mu[1];
      const double q = d0 * (prec(0, 0) * d0 + prec(0, 1) * d1) + d1 * (prec(1, 0) * d0 + prec(1, 1) * d1);
      const double t0 = theta2_first(a, b);
      const double p = std::exp(-0.5 * q) * (label == 0 ? t0 : 1.0 - t0);
      mass[grid.cell(a, b)] += p;
      total += p;
    }
  for (auto& m : mass) m /= total;
  return mass;
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

/// Joint probability of every label configuration of one document under
///   prod_n theta[z_n] * prod_k B(C_k + beta) / B(beta)
/// with phi integrated out. Configurations are indexed base K, word 0
/// being the most significant digit.
inline std::vector<double> enumerate_z_joint(const std::vector<int>& words, const std::vector<double>& theta,
                                             int v, double beta) {
  const int k = static_cast<int>(theta.size());
  const int n = static_cast<int>(words.size());
  int configs = 1;
  for (int i = 0; i < n; ++i) configs *= k;
  std::vector<double> logp(configs);
  for (int c = 0; c < configs; ++c) {
    std::vector<int> z(n);
    int rest = c;
    for (int i = n - 1; i >= 0; --i) {
      z[i] = rest % k;
      rest /= k;
    }
    std::vector<std::vector<int>> counts(k, std::vector<int>(v, 0));
    double lp = 0.0;
    for (int i = 0; i < n; ++i) {
      lp += std::log(theta[z[i]]);
      ++counts[z[i]][words[i]];
    }
    for (int t = 0; t < k; ++t) {
      int total = 0;
      for (int w = 0; w < v; ++w) {
        lp += std::lgamma(counts[t][w] + beta) - std::lgamma(beta);
        total += counts[t][w];
      }
      lp -= std::lgamma(total + v * beta) - std::lgamma(v * beta);
    }
    logp[c] = lp;
  }
  const double m = *std::max_element(logp.begin(), logp.end());
  std::vector<double> p(configs);
  double s = 0.0;
  for (int c = 0; c < configs; ++c) s += p[c] = std::exp(logp[c] - m);
  for (auto& x : p) x /= s;
  return p;
}

/// Analytic posterior mean of Sigma under NIW(mu0, kappa0, psi0, nu0)
/// given the rows of eta.
inline Matrix niw_sigma_mean(const Matrix& eta, const Vector& mu0, double kappa0, const Matrix& psi0,
                             double nu0) {
  const double d = static_cast<double>(eta.rows());
  const Eigen::Index k = eta.cols();
  Vector mean = Vector::Zero(k);
  for (Eigen::Index r = 0; r < eta.rows(); ++r) mean += eta.row(r).transpose();
  mean /= d;
  Matrix scatter = Matrix::Zero(k, k);
  for (Eigen::Index r = 0; r < eta.rows(); ++r) {
    const Vector c = eta.row(r).transpose() - mean;
    scatter += c * c.transpose();
  }
  const Vector dm = mean - mu0;
  const Matrix psi = psi0 + scatter + (kappa0 * d / (kappa0 + d)) * dm * dm.transpose();
  return psi / (nu0 + d - static_cast<double>(k) - 1.0);
}

/// CDF of N(mean, 1) restricted to (0, inf), via upper tails so that
/// large negative means keep their precision.
inline double truncnorm_positive_cdf(double y, double mean) {
  if (y <= 0.0) return 0.0;
  return 1.0 - std::erfc((y - mean) / std::sqrt(2.0)) / std::erfc(-mean / std::sqrt(2.0));
}

/// One-sample Kolmogorov-Smirnov statistic; sorts `xs`.
inline double ks_statistic(std::vector<double>& xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

/// Critical KS distance at significance 0.001 (asymptotic).
inline double ks_critical_001(std::size_t n) { return 1.94947 / std::sqrt(static_cast<double>(n)); }

/// Pairs estimated rows with true rows by repeatedly taking the closest
/// remaining pair in total variation; returns the TV of each true row.
inline std::vector<double> greedy_matched_tv(const Matrix& est, const Matrix& truth) {
  const Eigen::Index k = truth.rows();
  std::vector<double> out(static_cast<std::size_t>(k), 1.0);
  std::vector<bool> used_e(static_cast<std::size_t>(est.rows()), false), used_t(static_cast<std::size_t>(k), false);
  for (Eigen::Index round = 0; round < std::min(k, est.rows()); ++round) {
    double best = 2.0;
    Eigen::Index be = -1, bt = -1;
    for (Eigen::Index e = 0; e < est.rows(); ++e)
      for (Eigen::Index t = 0; t < k; ++t) {
        if (used_e[e] || used_t[t]) continue;
        const double tv = 0.5 * (est.row(e) - truth.row(t)).cwiseAbs().sum();
        if (tv < best) best = tv, be = e, bt = t;
      }
    used_e[be] = used_t[bt] = true;
    out[static_cast<std::size_t>(bt)] = best;
  }
  return out;
}

/// Sample skewness and excess kurtosis.
inline std::pair<double, double> skew_kurtosis(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double x : xs) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n, m3 /= n, m4 /= n;
  return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

}  // namespace oracle
