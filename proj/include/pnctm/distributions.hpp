#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "pnctm/normal.hpp"
#include "pnctm/rng.hpp"

namespace pnctm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Beyond this distance of the mean into the excluded half-line the
/// inverse-CDF sampler is replaced by exponential-proposal rejection.
inline constexpr double kTruncNormTailSwitch = 5.0;

namespace detail {

// Standard normal restricted to (lower, inf) with lower > 0. Exponential
// proposal with the optimal rate; acceptance tends to 1 as lower grows.
inline double sample_std_normal_tail(double lower, RngStream& rng) {
  const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  for (;;) {
    const double z = lower + rng.exponential(rate);
    const double d = z - rate;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) return z;
  }
}

}  // namespace detail

/// N(mean, 1) conditioned on a positive (or negative) outcome. The
/// normalizing mass is computed once so repeated draws from the same
/// column of an auxiliary matrix cost one uniform and one quantile each.
class TruncatedUnitNormal {
 public:
  TruncatedUnitNormal(double mean, bool positive)
      : mean_(mean), positive_(positive) {
    if (!std::isfinite(mean)) throw std::invalid_argument("truncated normal: non-finite mean");
    // Signed distance from the mean to the boundary, measured into the
    // excluded side: the mass kept is Phi(shift).
    shift_ = positive ? mean : -mean;
    use_tail_ = shift_ < -kTruncNormTailSwitch;
    if (!use_tail_) mass_ = std_normal_cdf(shift_);
  }

  double mean() const noexcept { return mean_; }
  bool positive() const noexcept { return positive_; }

  double operator()(RngStream& rng) const {
    double magnitude;
    if (use_tail_) {
      // |y| = shift + x, x ~ N(0,1) restricted to x > -shift > 5.
      magnitude = shift_ + detail::sample_std_normal_tail(-shift_, rng);
    } else {
      do {
        magnitude = shift_ - std_normal_quantile(rng.uniform() * mass_);
      } while (!(magnitude > 0.0));
    }
    return positive_ ? magnitude : -magnitude;
  }

 private:
  double mean_;
  bool positive_;
  double shift_ = 0.0;
  double mass_ = 1.0;
  bool use_tail_ = false;
};

inline double sample_truncnorm_positive(double mean, RngStream& rng) {
  return TruncatedUnitNormal(mean, true)(rng);
}

inline double sample_truncnorm_negative(double mean, RngStream& rng) {
  return TruncatedUnitNormal(mean, false)(rng);
}

/// Mean and covariance of a multivariate normal.
struct MvnParams {
  Vector mean;
  Matrix covariance;
};

/// Lower Cholesky factor of an SPD matrix; throws if the factorization fails.
inline Matrix cholesky_lower(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": matrix is not positive definite");
  return llt.matrixL();
}

/// Repeated draws from one MVN share the factorization.
class MvnSampler {
 public:
  explicit MvnSampler(const MvnParams& params)
      : mean_(params.mean), factor_(cholesky_lower(params.covariance, "sample_mvn")) {
    if (mean_.size() != factor_.rows())
      throw std::invalid_argument("sample_mvn: mean and covariance sizes differ");
  }

  Vector operator()(RngStream& rng) const {
    Vector z(mean_.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean_ + factor_.triangularView<Eigen::Lower>() * z;
  }

  const Matrix& factor() const noexcept { return factor_; }

 private:
  Vector mean_;
  Matrix factor_;
};

inline Vector sample_mvn(const MvnParams& params, RngStream& rng) {
  return MvnSampler(params)(rng);
}

/// Inverse-Wishart draw with E[draw] = scale / (dof - K - 1).
///
/// Bartlett decomposition of the Wishart on the inverse: with
/// scale^{-1} = L L^T and A lower triangular (A_ii^2 ~ chi2(dof - i),
/// A_ij ~ N(0,1) below the diagonal), W = L A A^T L^T ~ W(scale^{-1}, dof)
/// and the draw is W^{-1} = (L A)^{-T} (L A)^{-1}.
inline Matrix sample_inverse_wishart(const Matrix& scale, double dof, RngStream& rng) {
  const Eigen::Index k = scale.rows();
  if (scale.cols() != k || k == 0)
    throw std::invalid_argument("sample_inverse_wishart: scale must be square and non-empty");
  if (!(dof > static_cast<double>(k) - 1.0))
    throw std::invalid_argument("sample_inverse_wishart: dof must exceed K - 1");
  Eigen::LLT<Matrix> scale_llt(scale);
  if (scale_llt.info() != Eigen::Success)
    throw std::runtime_error("sample_inverse_wishart: scale is not positive definite");
  const Matrix precision_scale = scale_llt.solve(Matrix::Identity(k, k));
  const Matrix l = cholesky_lower(0.5 * (precision_scale + precision_scale.transpose()),
                                  "sample_inverse_wishart");

  Matrix a = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Matrix la = l.triangularView<Eigen::Lower>() * a;
  // (LA)^{-1} by triangular solve; the draw is its Gram matrix.
  const Matrix inv_la = la.triangularView<Eigen::Lower>().solve(Matrix::Identity(k, k));
  Matrix draw = inv_la.transpose() * inv_la;
  return 0.5 * (draw + draw.transpose());
}

/// Index drawn with probability proportional to weights[k].
inline std::size_t sample_categorical(std::span<const double> weights, RngStream& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("sample_categorical: weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("sample_categorical: all weights are zero");
  const double target = rng.uniform() * total;
  double running = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    running += weights[k];
    last_positive = k;
    if (target < running) return k;
  }
  return last_positive;
}

}  // namespace pnctm
