#pragma once

#include <chrono>
#include <cstddef>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "pnctm/corpus.hpp"
#include "pnctm/gibbs.hpp"
#include "pnctm/model.hpp"

namespace pnctm {

/// Re-dimensions a hyperparameter template for K topics: mu0 and Psi0 keep
/// their mean diagonal level, nu0 keeps its offset above K, and every
/// scalar setting (beta, kappa0, schedule, seed) is copied.
inline Hyperparams with_topics(const Hyperparams& tmpl, int k) {
  Hyperparams h = tmpl;
  h.k = k;
  const double mu_level = tmpl.mu0.size() > 0 ? tmpl.mu0.mean() : 0.0;
  const double psi_level = tmpl.psi0.rows() > 0 ? tmpl.psi0.diagonal().mean() : 1.0;
  h.mu0 = Vector::Constant(k, mu_level);
  h.psi0 = psi_level * Matrix::Identity(k, k);
  h.nu0 = k + (tmpl.nu0 - tmpl.k);
  return h;
}

struct SweepRow {
  int k = 0;
  double loglik = 0.0;
  double seconds = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int best_k = 0;
};

/// Fits every K in k_list with the same seed and reports the posterior
/// log-likelihood of each; best_k is the argmax (first on ties).
inline SweepResult sweep_k(const Corpus& corpus, const Hyperparams& tmpl,
                           const std::vector<int>& k_list) {
  if (k_list.empty()) throw std::invalid_argument("sweep_k: empty K list");
  SweepResult result;
  double best = -std::numeric_limits<double>::infinity();
  for (int k : k_list) {
    const Hyperparams h = with_topics(tmpl, k);
    const auto start = std::chrono::steady_clock::now();
    const FitResult fit = run(corpus, h);
    const double ll = posterior_loglikelihood(fit, corpus, h.beta);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.rows.push_back({k, ll, secs});
    if (ll > best) {
      best = ll;
      result.best_k = k;
    }
  }
  return result;
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  const auto old = out.precision(17);
  out << "K,loglik,seconds\n";
  for (const auto& r : result.rows) out << r.k << ',' << r.loglik << ',' << r.seconds << '\n';
  out.precision(old);
}

}  // namespace pnctm
