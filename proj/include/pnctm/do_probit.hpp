#pragma once

// Diagonal-orthant probit link between a document's Gaussian scores eta_d
// and its topic proportions theta_d, plus the two conditionals that make
// the link conjugate: sign-truncated auxiliary draws Y_d | eta_d, z_d and
// the Gaussian eta_d | Y_d, mu, Sigma.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "pnctm/distributions.hpp"
#include "pnctm/normal.hpp"
#include "pnctm/rng.hpp"

namespace pnctm {

using TopicLabel = int;

/// theta_k proportional to Phi(eta_k) * prod_{j != k} Phi(-eta_j).
///
/// Dividing through by prod_j Phi(-eta_j) leaves
///   log theta_k = log Phi(eta_k) - log Phi(-eta_k) + const,
/// so the normalization is a log-sum-exp over K terms and nothing
/// underflows even when every Phi(-eta_j) is tiny.
inline void do_theta(std::span<const double> eta, std::span<double> theta) {
  const std::size_t k = eta.size();
  if (k < 2) throw std::invalid_argument("do_theta: need at least two topics");
  if (theta.size() != k) throw std::invalid_argument("do_theta: output size mismatch");
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(eta[i])) throw std::invalid_argument("do_theta: non-finite eta");
    theta[i] = log_std_normal_cdf(eta[i]) - log_std_normal_cdf(-eta[i]);
    max_log = std::max(max_log, theta[i]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    theta[i] = std::exp(theta[i] - max_log);
    total += theta[i];
  }
  for (std::size_t i = 0; i < k; ++i) theta[i] /= total;
}

inline Vector do_theta(const Vector& eta) {
  Vector theta(eta.size());
  do_theta(std::span<const double>(eta.data(), static_cast<std::size_t>(eta.size())),
           std::span<double>(theta.data(), static_cast<std::size_t>(theta.size())));
  return theta;
}

/// Auxiliary matrix Y_d (N_d x K) together with the labels its sign
/// pattern was conditioned on: row n is positive exactly in column
/// assignments[n].
struct AuxMatrix {
  Matrix values;
  std::vector<TopicLabel> assignments;

  Vector column_sums() const { return values.colwise().sum().transpose(); }
};

/// Y_dn^k ~ N+(eta_k, 1) for the word's own label k and N-(eta_j, 1)
/// for every other column. O(K) per word, no rejection on the label.
inline AuxMatrix sample_aux(const Vector& eta, std::span<const TopicLabel> assignments,
                            RngStream& rng) {
  const auto k = eta.size();
  std::vector<TruncatedUnitNormal> positive, negative;
  positive.reserve(static_cast<std::size_t>(k));
  negative.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    positive.emplace_back(eta[j], true);
    negative.emplace_back(eta[j], false);
  }
  AuxMatrix aux;
  aux.assignments.assign(assignments.begin(), assignments.end());
  aux.values.resize(static_cast<Eigen::Index>(assignments.size()), k);
  for (std::size_t n = 0; n < assignments.size(); ++n) {
    const TopicLabel label = assignments[n];
    if (label < 0 || label >= k) throw std::invalid_argument("sample_aux: label out of range");
    const auto row = static_cast<Eigen::Index>(n);
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto& dist = (j == label) ? positive[static_cast<std::size_t>(j)]
                                      : negative[static_cast<std::size_t>(j)];
      aux.values(row, j) = dist(rng);
    }
  }
  return aux;
}

/// Gaussian conditional of eta_d given Y_d with unit auxiliary noise.
///
/// With X_d = 1_{N_d} (x) I_K and A = I, X_d^T X_d = N_d I and
/// X_d^T vec(Y_d) is the vector of column sums, so
///   precision = Sigma^{-1} + N_d I,
///   mean      = precision^{-1} (Sigma^{-1} mu + colsum(Y_d)).
/// Sigma^{-1} and Sigma^{-1} mu are shared by every document of a sweep.
class EtaConditional {
 public:
  EtaConditional(const Vector& mu, const Matrix& sigma) {
    const auto k = sigma.rows();
    if (sigma.cols() != k || mu.size() != k)
      throw std::invalid_argument("update_eta: mu/sigma dimension mismatch");
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("update_eta: sigma is not positive definite");
    sigma_inv_ = llt.solve(Matrix::Identity(k, k));
    sigma_inv_ = 0.5 * (sigma_inv_ + sigma_inv_.transpose());
    sigma_inv_mu_ = sigma_inv_ * mu;
  }

  /// Posterior moments for a document with `n_words` rows whose
  /// auxiliary column sums are `column_sums`.
  MvnParams moments(const Vector& column_sums, std::size_t n_words) const {
    const Eigen::LLT<Matrix> llt = factor(n_words);
    const auto k = sigma_inv_.rows();
    return {llt.solve(sigma_inv_mu_ + column_sums), llt.solve(Matrix::Identity(k, k))};
  }

  Vector draw(const Vector& column_sums, std::size_t n_words, RngStream& rng) const {
    if (column_sums.size() != sigma_inv_.rows())
      throw std::invalid_argument("update_eta: column sum dimension mismatch");
    const Eigen::LLT<Matrix> llt = factor(n_words);
    Vector mean = llt.solve(sigma_inv_mu_ + column_sums);
    Vector z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    // precision = L L^T, so L^{-T} z has covariance precision^{-1}.
    mean += llt.matrixU().solve(z);
    return mean;
  }

 private:
  Eigen::LLT<Matrix> factor(std::size_t n_words) const {
    Matrix precision = sigma_inv_;
    precision.diagonal().array() += static_cast<double>(n_words);
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("update_eta: posterior precision factorization failed");
    return llt;
  }

  Matrix sigma_inv_;
  Vector sigma_inv_mu_;
};

/// log P(exactly one coordinate of N(eta, I) is positive): the mass of the
/// union of diagonal orthants, i.e. the denominator of do_theta before the
/// prod_j Phi(-eta_j) factor is divided out.
inline double log_orthant_mass(const Vector& eta) {
  double log_neg = 0.0;
  double max_log = -std::numeric_limits<double>::infinity();
  std::vector<double> odds(static_cast<std::size_t>(eta.size()));
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    const double ln = log_std_normal_cdf(-eta[j]);
    log_neg += ln;
    odds[static_cast<std::size_t>(j)] = log_std_normal_cdf(eta[j]) - ln;
    max_log = std::max(max_log, odds[static_cast<std::size_t>(j)]);
  }
  double total = 0.0;
  for (double o : odds) total += std::exp(o - max_log);
  return log_neg + max_log + std::log(total);
}

/// sum_k counts[k] * log theta_k(eta): the likelihood of a document's
/// labels given eta, which depends on the labels only through counts.
inline double log_label_likelihood(const Vector& eta, std::span<const int> counts) {
  const Vector theta = do_theta(eta);
  double total = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] > 0) total += counts[k] * std::log(theta[static_cast<Eigen::Index>(k)]);
  return total;
}

/// Draws of N(eta, I) that land outside every diagonal orthant, generated
/// by running the "draw until exactly one coordinate is positive" sampler
/// once per word and keeping the failures.
struct RejectedDraws {
  Vector sum;
  std::size_t count = 0;
};

inline RejectedDraws sample_rejected_draws(const Vector& eta, std::size_t n_words, RngStream& rng,
                                           std::size_t max_draws) {
  RejectedDraws out{Vector::Zero(eta.size()), 0};
  Vector y(eta.size());
  for (std::size_t n = 0; n < n_words; ++n) {
    for (;;) {
      int positive = 0;
      for (Eigen::Index j = 0; j < eta.size(); ++j) {
        y[j] = eta[j] + rng.normal();
        positive += y[j] > 0.0;
      }
      if (positive == 1) break;
      out.sum += y;
      if (++out.count > max_draws)
        throw std::runtime_error("sample_rejected_draws: orthant mass too small (over " +
                                 std::to_string(max_draws) + " rejected draws)");
    }
  }
  return out;
}

inline Vector update_eta(const AuxMatrix& aux, const Vector& mu, const Matrix& sigma,
                         RngStream& rng) {
  if (aux.values.rows() == 0) throw std::invalid_argument("update_eta: empty auxiliary matrix");
  return EtaConditional(mu, sigma).draw(aux.column_sums(),
                                        static_cast<std::size_t>(aux.values.rows()), rng);
}

/// One elliptical slice sampling step for eta_d targeting
///   N(eta; mu, Sigma) * prod_k theta_k(eta)^{counts[k]}
/// where `sigma_factor` is the lower Cholesky factor of Sigma. Always
/// returns a new point; the bracket shrinks toward the current one.
inline Vector elliptical_slice_eta(const Vector& current, std::span<const int> counts,
                                   const Vector& mu, const Matrix& sigma_factor, RngStream& rng) {
  const auto k = current.size();
  Vector nu(k);
  for (Eigen::Index i = 0; i < k; ++i) nu[i] = rng.normal();
  nu = sigma_factor.triangularView<Eigen::Lower>() * nu;
  const Vector x = current - mu;
  const double log_threshold = log_label_likelihood(current, counts) + std::log(rng.uniform());
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double angle = rng.uniform() * two_pi;
  double lo = angle - two_pi, hi = angle;
  for (;;) {
    Vector proposal = mu + x * std::cos(angle) + nu * std::sin(angle);
    if (log_label_likelihood(proposal, counts) > log_threshold) return proposal;
    if (angle < 0.0) lo = angle; else hi = angle;
    angle = lo + rng.uniform() * (hi - lo);
  }
}

}  // namespace pnctm
