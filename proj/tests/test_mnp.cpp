#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "pnctm/mnp.hpp"

using namespace pnctm;

namespace {

MnpConfig with_samples(std::size_t n) {
  MnpConfig c;
  c.mc_samples = n;
  return c;
}

}  // namespace

TEST(MnpTheta, ZeroEtaIsUniform) {
  RngStream rng(1, 1);
  for (int k : {2, 5, 10}) {
    const auto est = mnp_theta(Vector::Zero(k), with_samples(20000), rng);
    for (int i = 0; i < k; ++i) EXPECT_NEAR(est.probs[i], 1.0 / k, 3 * est.std_errors[i] + 1e-12) << k;
  }
}

TEST(MnpTheta, TwoTopicsClosedForm) {
  RngStream rng(1, 2);
  const auto est = mnp_theta((Vector(2) << 1.0, 0.0).finished(), with_samples(100000), rng);
  EXPECT_NEAR(est.probs[0], oracle::phi_cdf(1.0 / std::sqrt(2.0)), 3 * est.std_errors[0]);
  EXPECT_NEAR(oracle::phi_cdf(1.0 / std::sqrt(2.0)), 0.76025, 1e-5);
}

TEST(MnpTheta, ShiftInvariant) {
  const Vector eta = (Vector(3) << 0.4, -0.3, 1.0).finished();
  RngStream a(1, 3), b(1, 3);
  const auto x = mnp_theta(eta, with_samples(5000), a);
  const auto y = mnp_theta((eta.array() + 2.5).matrix(), with_samples(5000), b);
  // common random numbers make the estimates agree to rounding
  EXPECT_LT((x.probs - y.probs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MnpTheta, ValidatesConfig) {
  RngStream rng(1, 4);
  EXPECT_THROW(mnp_theta(Vector::Zero(2), with_samples(10), rng), std::invalid_argument);
}

TEST(MnpRejection, SymmetricAcceptanceRate) {
  RngStream rng(2, 1);
  std::size_t attempts = 0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    const auto r = mnp_sample_aux_rejection(Vector::Zero(2), 0, {}, rng);
    ASSERT_TRUE(r.accepted);
    attempts += r.attempts;
  }
  EXPECT_NEAR(trials / double(attempts), 0.5, 0.005);
}

TEST(MnpRejection, AcceptedDrawHasLabelAsMax) {
  RngStream rng(2, 2);
  const Vector eta = (Vector(5) << 0.1, 1.0, -0.5, 0.3, 0.0).finished();
  for (int i = 0; i < 1000; ++i) {
    const TopicLabel label = i % 5;
    const auto r = mnp_sample_aux_rejection(eta, label, {}, rng);
    ASSERT_TRUE(r.accepted);
    Eigen::Index best;
    r.draw.maxCoeff(&best);
    EXPECT_EQ(best, label);
  }
}

TEST(MnpRejection, AdversarialFortyTopicsMostlyFails) {
  RngStream rng(2, 3);
  MnpConfig cfg;
  cfg.max_rejection_attempts = 10000;
  int failures = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    Vector eta(40);
    for (int j = 0; j < 40; ++j) eta[j] = rng.normal();
    Eigen::Index lowest;
    eta.minCoeff(&lowest);
    const auto r = mnp_sample_aux_rejection(eta, static_cast<TopicLabel>(lowest), cfg, rng);
    failures += !r.accepted;
    if (!r.accepted) EXPECT_EQ(r.attempts, cfg.max_rejection_attempts);
  }
  EXPECT_GT(failures / double(trials), 0.5);
}

TEST(Bench, RowStructureAndCsv) {
  MnpConfig cfg;
  cfg.mc_samples = 200;
  cfg.max_rejection_attempts = 100;
  const auto rows = bench_compare({3, 5}, 20, 2, cfg, 7);
  ASSERT_EQ(rows.size(), 8u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].k, i < 4 ? 3 : 5);
    EXPECT_GE(rows[i].seconds, 0.0);
    if (rows[i].method == "DO") EXPECT_EQ(rows[i].failures, 0u);
  }
  std::ostringstream csv, table;
  write_bench_csv(csv, rows);
  write_bench_table(table, rows);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "K,task,method,seconds,failures");
  EXPECT_NE(table.str().find("Sampling Task (K=5)"), std::string::npos);
  EXPECT_THROW(bench_compare({}, 20, 2, cfg, 7), std::invalid_argument);
}
