#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "pnctm/distributions.hpp"
#include "pnctm/normal.hpp"
#include "sampler_checks.hpp"

using namespace pnctm;

TEST(Rng, SameKeySameSequence) {
  RngStream a(5, stream_key(3, 2, 7)), b(5, stream_key(3, 2, 7)), c(5, stream_key(3, 2, 8));
  std::vector<std::uint64_t> xa, xb, xc;
  for (int i = 0; i < 8; ++i) xa.push_back(a()), xb.push_back(b()), xc.push_back(c());
  EXPECT_EQ(xa, xb);
  EXPECT_NE(xa, xc);
}

TEST(Rng, UniformIsOpenInterval) {
  RngStream r(1, 1);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Normal, CdfValues) {
  EXPECT_DOUBLE_EQ(std_normal_cdf(0.0), 0.5);
  EXPECT_NEAR(std_normal_cdf(1.0), 0.8413447461, 1e-10);
  EXPECT_NEAR(std_normal_cdf(-8.0), 6.22e-16, 0.01 * 6.22e-16);
  EXPECT_THROW(std_normal_cdf(std::nan("")), std::domain_error);
}

TEST(Normal, LogCdfAgreesWithExtendedPrecision) {
  for (double x : {-200.0, -40.0, -36.5, -35.5, -10.0, -1.0, 0.0, 2.0, 4.9, 5.1, 8.0, 30.0}) {
    const auto ref = boost::multiprecision::log(oracle::big_phi(oracle::Big(x)));
    const double r = ref.convert_to<double>();
    EXPECT_NEAR(log_std_normal_cdf(x), r, 1e-13 * std::max(1.0, std::abs(r))) << "x=" << x;
  }
}

TEST(Normal, QuantileInvertsCdf) {
  for (double p : {1e-300, 1e-12, 0.001, 0.3, 0.5, 0.9, 1 - 1e-12}) {
    const double x = std_normal_quantile(p);
    EXPECT_NEAR(std_normal_cdf(x) / p, 1.0, 1e-9) << p;
  }
  EXPECT_THROW(std_normal_quantile(0.0), std::domain_error);
  EXPECT_THROW(std_normal_quantile(1.0), std::domain_error);
}

TEST(TruncNormal, HalfNormalAndShiftedMeans) {
  const auto r = checks::truncnorm_moments();
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(TruncNormal, KolmogorovSmirnov) {
  const auto r = checks::truncnorm_ks();
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(TruncNormal, SupportAtExtremeMeans) {
  RngStream rng(3, 3);
  for (double m : {-1e3, -50.0, 50.0, 1e3}) {
    for (int i = 0; i < 1000; ++i) {
      const double p = sample_truncnorm_positive(m, rng);
      const double q = sample_truncnorm_negative(m, rng);
      ASSERT_TRUE(std::isfinite(p) && p > 0.0) << m;
      ASSERT_TRUE(std::isfinite(q) && q < 0.0) << m;
    }
  }
}

TEST(Mvn, IdentityVariances) {
  RngStream rng(4, 1);
  const MvnSampler s({Vector::Zero(3), Matrix::Identity(3, 3)});
  Vector sum = Vector::Zero(3), sq = Vector::Zero(3);
  double cross = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const Vector y = s(rng);
    sum += y;
    sq += y.cwiseProduct(y);
    cross += y[0] * y[1];
  }
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(sq[j] / n - std::pow(sum[j] / n, 2), 1.0, 0.01);
  EXPECT_NEAR(cross / n, 0.0, 0.01);
}

TEST(Mvn, Correlation) {
  RngStream rng(4, 2);
  Matrix sigma(2, 2);
  sigma << 1.0, 0.9, 0.9, 1.0;
  Vector mu(2);
  mu << 1.0, -2.0;
  const MvnSampler s({mu, sigma});
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const Vector y = s(rng);
    sx += y[0], sy += y[1], sxx += y[0] * y[0], syy += y[1] * y[1], sxy += y[0] * y[1];
  }
  const double cxy = sxy / n - sx / n * sy / n;
  const double r = cxy / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_NEAR(r, 0.9, 0.01);
  EXPECT_NEAR(sx / n, 1.0, 0.01);
}

TEST(Mvn, StandardizedComponentsAreNormal) {
  RngStream rng(4, 3);
  Matrix sigma(3, 3);
  sigma << 2.0, 0.6, -0.3, 0.6, 1.0, 0.2, -0.3, 0.2, 0.5;
  const Vector mu = Vector::LinSpaced(3, -1.0, 1.0);
  const MvnSampler s({mu, sigma});
  const Matrix l = cholesky_lower(sigma, "test");
  const int n = 1'000'000;
  std::vector<std::vector<double>> comps(3, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    const Vector z = l.triangularView<Eigen::Lower>().solve(s(rng) - mu);
    for (int j = 0; j < 3; ++j) comps[j][i] = z[j];
  }
  for (int j = 0; j < 3; ++j) {
    const auto [skew, kurt] = oracle::skew_kurtosis(comps[j]);
    EXPECT_NEAR(skew, 0.0, 0.05) << j;
    EXPECT_NEAR(kurt, 0.0, 0.05) << j;
  }
}

TEST(Mvn, RejectsNonSpd) {
  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(MvnSampler({Vector::Zero(2), bad}), std::runtime_error);
}

TEST(InverseWishart, Moments) {
  const auto r = checks::inverse_wishart_moments();
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(InverseWishart, Preconditions) {
  RngStream rng(1, 1);
  EXPECT_THROW(sample_inverse_wishart(Matrix::Identity(3, 3), 2.0, rng), std::invalid_argument);
  Matrix bad(2, 2);
  bad << 1.0, 3.0, 3.0, 1.0;
  EXPECT_THROW(sample_inverse_wishart(bad, 5.0, rng), std::runtime_error);
}

TEST(Categorical, DegenerateAndSymmetric) {
  RngStream rng(6, 1);
  const std::vector<double> point{1.0, 0.0, 0.0};
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample_categorical(point, rng), 0u);

  const std::vector<double> fair{1.0, 1.0};
  const int n = 1'000'000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += sample_categorical(fair, rng) == 1;
  EXPECT_NEAR(ones / double(n), 0.5, 0.005);

  const std::vector<double> w{2.0, 1.0, 1.0};
  std::vector<int> c(3, 0);
  for (int i = 0; i < n; ++i) ++c[sample_categorical(w, rng)];
  EXPECT_NEAR(c[0] / double(n), 0.5, 0.005);
  EXPECT_NEAR(c[1] / double(n), 0.25, 0.005);
  EXPECT_NEAR(c[2] / double(n), 0.25, 0.005);
}

TEST(Categorical, InvalidWeights) {
  RngStream rng(6, 2);
  const std::vector<double> zeros{0.0, 0.0}, negative{1.0, -0.5};
  EXPECT_THROW(sample_categorical(zeros, rng), std::invalid_argument);
  EXPECT_THROW(sample_categorical(negative, rng), std::invalid_argument);
}
