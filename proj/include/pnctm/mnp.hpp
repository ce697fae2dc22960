#pragma once

// Classical multinomial probit with identity latent covariance, kept as a
// baseline: Monte Carlo topic probabilities and the "label must be the
// argmax" auxiliary rejection sampler. Rejection failures are returned as
// data because they are the behaviour being measured.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pnctm/distributions.hpp"
#include "pnctm/do_probit.hpp"
#include "pnctm/normal.hpp"
#include "pnctm/rng.hpp"

namespace pnctm {

struct MnpConfig {
  std::size_t mc_samples = 1000;
  std::size_t max_rejection_attempts = 10000;
  std::chrono::duration<double> timeout{10.0};

  void validate() const {
    if (mc_samples < 100) throw std::invalid_argument("MnpConfig: mc_samples must be >= 100");
    if (max_rejection_attempts < 1)
      throw std::invalid_argument("MnpConfig: max_rejection_attempts must be >= 1");
  }
};

struct MnpThetaEstimate {
  Vector probs;
  Vector std_errors;
};

/// theta_k = E_v[ prod_{j != k} Phi(v + eta_k - eta_j) ], v ~ N(0,1),
/// estimated with common random numbers across k and then normalized.
inline MnpThetaEstimate mnp_theta(const Vector& eta, const MnpConfig& config, RngStream& rng) {
  config.validate();
  const auto k = eta.size();
  if (k < 2) throw std::invalid_argument("mnp_theta: need at least two topics");
  Vector sum = Vector::Zero(k);
  Vector sum_sq = Vector::Zero(k);
  for (std::size_t s = 0; s < config.mc_samples; ++s) {
    const double v = rng.normal();
    for (Eigen::Index c = 0; c < k; ++c) {
      double prod = 1.0;
      for (Eigen::Index j = 0; j < k; ++j)
        if (j != c) prod *= std_normal_cdf(v + eta[c] - eta[j]);
      sum[c] += prod;
      sum_sq[c] += prod * prod;
    }
  }
  const double n = static_cast<double>(config.mc_samples);
  const Vector mean = sum / n;
  const double total = mean.sum();
  MnpThetaEstimate out;
  out.probs = mean / total;
  out.std_errors.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const double var = std::max(0.0, (sum_sq[c] / n - mean[c] * mean[c]) * n / (n - 1.0));
    out.std_errors[c] = std::sqrt(var / n) / total;
  }
  return out;
}

struct RejectionResult {
  bool accepted = false;
  bool timed_out = false;
  std::size_t attempts = 0;
  Vector draw;  ///< accepted Y, empty on failure
};

/// Draws Y ~ MVN(eta, I) until Y[label] is the largest component.
inline RejectionResult mnp_sample_aux_rejection(const Vector& eta, TopicLabel label,
                                                const MnpConfig& config, RngStream& rng) {
  config.validate();
  const auto k = eta.size();
  if (label < 0 || label >= k) throw std::invalid_argument("mnp_sample_aux_rejection: bad label");
  const auto start = std::chrono::steady_clock::now();
  RejectionResult result;
  Vector y(k);
  while (result.attempts < config.max_rejection_attempts) {
    ++result.attempts;
    for (Eigen::Index j = 0; j < k; ++j) y[j] = eta[j] + rng.normal();
    Eigen::Index best = 0;
    y.maxCoeff(&best);
    if (best == label) {
      result.accepted = true;
      result.draw = y;
      return result;
    }
    if ((result.attempts & 0xff) == 0 &&
        std::chrono::steady_clock::now() - start > config.timeout) {
      result.timed_out = true;
      break;
    }
  }
  return result;
}

struct BenchRow {
  int k = 0;
  std::string task;    ///< "theta" or "aux"
  std::string method;  ///< "MNP" or "DO"
  double seconds = 0.0;  ///< mean wall time per document
  std::size_t failures = 0;
};

/// Per-document timings of theta evaluation and auxiliary sampling under
/// the MNP baseline and the diagonal-orthant scheme. Each repetition draws
/// a fresh eta ~ N(0, I) and uniformly random word labels, mirroring a
/// random initialization. Runs single-threaded.
inline std::vector<BenchRow> bench_compare(const std::vector<int>& k_list,
                                           std::size_t words_per_doc, std::size_t repetitions,
                                           const MnpConfig& config, std::uint64_t seed) {
  if (k_list.empty()) throw std::invalid_argument("bench_compare: empty K list");
  if (repetitions == 0) throw std::invalid_argument("bench_compare: repetitions must be > 0");
  if (words_per_doc == 0) throw std::invalid_argument("bench_compare: words_per_doc must be > 0");
  using clock = std::chrono::steady_clock;
  auto seconds_since = [](clock::time_point t0) {
    return std::chrono::duration<double>(clock::now() - t0).count();
  };

  std::vector<BenchRow> rows;
  for (int k : k_list) {
    if (k < 2) throw std::invalid_argument("bench_compare: K must be >= 2");
    BenchRow mnp_theta_row{k, "theta", "MNP"}, do_theta_row{k, "theta", "DO"};
    BenchRow mnp_aux_row{k, "aux", "MNP"}, do_aux_row{k, "aux", "DO"};
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      RngStream setup(seed, stream_key(static_cast<std::uint64_t>(k), 0, rep));
      Vector eta(k);
      for (int j = 0; j < k; ++j) eta[j] = setup.normal();
      std::vector<TopicLabel> labels(words_per_doc);
      for (auto& l : labels) l = static_cast<TopicLabel>(setup() % static_cast<unsigned>(k));

      RngStream rng(seed, stream_key(static_cast<std::uint64_t>(k), 1, rep));
      auto t0 = clock::now();
      volatile double sink = mnp_theta(eta, config, rng).probs[0];
      mnp_theta_row.seconds += seconds_since(t0);

      t0 = clock::now();
      sink = do_theta(eta)[0];
      do_theta_row.seconds += seconds_since(t0);

      t0 = clock::now();
      for (TopicLabel l : labels) {
        const auto r = mnp_sample_aux_rejection(eta, l, config, rng);
        if (!r.accepted) ++mnp_aux_row.failures;
      }
      mnp_aux_row.seconds += seconds_since(t0);

      t0 = clock::now();
      sink = sample_aux(eta, labels, rng).values(0, 0);
      do_aux_row.seconds += seconds_since(t0);
      (void)sink;
    }
    for (BenchRow* row : {&mnp_theta_row, &do_theta_row, &mnp_aux_row, &do_aux_row}) {
      row->seconds /= static_cast<double>(repetitions);
      rows.push_back(*row);
    }
  }
  return rows;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "K,task,method,seconds,failures\n";
  for (const auto& r : rows)
    out << r.k << ',' << r.task << ',' << r.method << ',' << r.seconds << ',' << r.failures << '\n';
}

/// Human-readable table with one block per K: rows are the two sampling
/// tasks, columns the two methods. Failed rejection draws are flagged NA.
inline void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows) {
  auto find = [&](int k, const char* task, const char* method) -> const BenchRow* {
    for (const auto& r : rows)
      if (r.k == k && r.task == task && r.method == method) return &r;
    return nullptr;
  };
  std::vector<int> ks;
  for (const auto& r : rows)
    if (ks.empty() || ks.back() != r.k) ks.push_back(r.k);
  char buf[160];
  for (int k : ks) {
    std::snprintf(buf, sizeof buf, "%-28s %16s %14s\n",
                  ("Sampling Task (K=" + std::to_string(k) + ")").c_str(), "MNP", "DO Probit");
    out << buf;
    for (const char* task : {"theta", "aux"}) {
      const BenchRow* m = find(k, task, "MNP");
      const BenchRow* d = find(k, task, "DO");
      if (!m || !d) continue;
      std::string mnp_cell = std::to_string(m->seconds);
      if (m->failures > 0) mnp_cell += " (" + std::to_string(m->failures) + " NA)";
      std::snprintf(buf, sizeof buf, "%-28s %16s %14.6f\n",
                    std::string(task) == "theta" ? "Topic distribution theta"
                                                 : "Auxiliary variable Y_d",
                    mnp_cell.c_str(), d->seconds);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace pnctm
