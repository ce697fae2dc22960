#pragma once

// Full posterior sampler. One sweep is (Y, eta) per document, then the
// collapsed topic labels z, then (mu, Sigma) from their NIW conditional.
// Every random draw comes from a substream keyed by (iteration, phase,
// index), so results do not depend on thread count and a resumed run
// replays exactly the draws an uninterrupted run would make.

#include <chrono>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "pnctm/corpus.hpp"
#include "pnctm/diagnostics.hpp"
#include "pnctm/distributions.hpp"
#include "pnctm/do_probit.hpp"
#include "pnctm/model.hpp"

namespace pnctm {

namespace detail {

// Runs body(begin, end) over [0, n) split into `threads` contiguous chunks
// and rethrows the first exception.
template <typename Body>
void parallel_chunks(std::size_t n, std::size_t threads, Body&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = n * t / threads, end = n * (t + 1) / threads;
      pool.emplace_back([&, begin, end] {
        try {
          body(begin, end);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Updates every eta_d with hyper.eta_kernel given (z_d, mu, Sigma), then
/// refreshes theta_d. Documents are independent given (mu, Sigma, z).
inline void sweep_eta(ModelState& state, const Corpus& corpus, const Hyperparams& hyper,
                      std::size_t iteration) {
  const EtaConditional conditional(state.mu, state.sigma);
  const Matrix sigma_factor = cholesky_lower(state.sigma, "sweep_eta");
  detail::parallel_chunks(corpus.num_docs(), hyper.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<int> counts(static_cast<std::size_t>(hyper.k));
    for (std::size_t d = begin; d < end; ++d) {
      RngStream rng = phase_stream(hyper.seed, iteration, Phase::eta, d);
      const auto row = static_cast<Eigen::Index>(d);
      const Vector eta = state.eta.row(row).transpose();
      const std::size_t n_words = corpus.docs[d].size();
      Vector next;
      switch (hyper.eta_kernel) {
        case EtaKernel::orthant_conjugate: {
          const AuxMatrix aux = sample_aux(eta, state.z[d], rng);
          next = conditional.draw(aux.column_sums(), n_words, rng);
          break;
        }
        case EtaKernel::orthant_conjugate_exact: {
          const AuxMatrix aux = sample_aux(eta, state.z[d], rng);
          const RejectedDraws extra =
              sample_rejected_draws(eta, n_words, rng, hyper.max_rejected_draws);
          next = conditional.draw(aux.column_sums() + extra.sum, n_words + extra.count, rng);
          break;
        }
        case EtaKernel::elliptical_slice: {
          std::fill(counts.begin(), counts.end(), 0);
          for (TopicLabel l : state.z[d]) ++counts[static_cast<std::size_t>(l)];
          next = elliptical_slice_eta(eta, counts, state.mu, sigma_factor, rng);
          break;
        }
      }
      state.eta.row(row) = next.transpose();
      state.theta.row(row) = do_theta(next).transpose();
    }
  });
}

namespace detail {

inline void sweep_z_range(std::vector<std::vector<TopicLabel>>& z, const Matrix& theta,
                          CountMatrix& counts, CountVector& totals, const Corpus& corpus,
                          const Hyperparams& hyper, std::size_t iteration, std::size_t begin,
                          std::size_t end) {
  const int k = hyper.k;
  const double vbeta = static_cast<double>(corpus.vocab_size) * hyper.beta;
  std::vector<double> weights(static_cast<std::size_t>(k));
  for (std::size_t d = begin; d < end; ++d) {
    RngStream rng = phase_stream(hyper.seed, iteration, Phase::z, d);
    const auto row = static_cast<Eigen::Index>(d);
    for (std::size_t n = 0; n < corpus.docs[d].size(); ++n) {
      const TermId w = corpus.docs[d][n];
      TopicLabel& label = z[d][n];
      --counts(label, w);
      --totals[label];
      for (int t = 0; t < k; ++t)
        weights[static_cast<std::size_t>(t)] =
            (counts(t, w) + hyper.beta) / (totals[t] + vbeta) * theta(row, t);
      label = static_cast<TopicLabel>(sample_categorical(weights, rng));
      ++counts(label, w);
      ++totals[label];
    }
  }
}

}  // namespace detail

/// Resamples every z_dn from
///   P(z_dn = k | rest) ~ (C_{k,-n}^{w_dn} + beta) / (n_{k,-n} + V beta) * theta_dk
/// with incremental count updates. With hyper.partitioned_z and more than
/// one thread, documents are split into partitions that each sweep against
/// a private copy of the counts; deltas are merged at the end. That mode
/// is an approximation of the sequential sampler.
inline void sweep_z(ModelState& state, const Corpus& corpus, const Hyperparams& hyper,
                    std::size_t iteration) {
  const std::size_t parts = std::min(hyper.threads, corpus.num_docs());
  if (!hyper.partitioned_z || parts <= 1) {
    detail::sweep_z_range(state.z, state.theta, state.topic_word_counts, state.topic_totals,
                          corpus, hyper, iteration, 0, corpus.num_docs());
    return;
  }
  std::vector<CountMatrix> local_counts(parts, state.topic_word_counts);
  std::vector<CountVector> local_totals(parts, state.topic_totals);
  std::vector<std::size_t> bounds(parts + 1);
  for (std::size_t p = 0; p <= parts; ++p) bounds[p] = corpus.num_docs() * p / parts;
  detail::parallel_chunks(parts, parts, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p)
      detail::sweep_z_range(state.z, state.theta, local_counts[p], local_totals[p], corpus, hyper,
                            iteration, bounds[p], bounds[p + 1]);
  });
  const CountMatrix base = state.topic_word_counts;
  const CountVector base_totals = state.topic_totals;
  for (std::size_t p = 0; p < parts; ++p) {
    state.topic_word_counts += local_counts[p] - base;
    state.topic_totals += local_totals[p] - base_totals;
  }
}

/// Normal-inverse-Wishart conditional of (mu, Sigma) given eta_1..eta_D.
struct NiwPosterior {
  Vector mu_prime;
  double kappa_prime = 0.0;
  double nu_prime = 0.0;
  Matrix psi_prime;
};

/// kappa' = kappa0 + D, nu' = nu0 + D, mu' = (D eta_bar + kappa0 mu0)/(D + kappa0),
/// Psi' = Psi0 + Q + kappa0 D/(kappa0 + D) (eta_bar - mu0)(eta_bar - mu0)^T,
/// Q = sum_d (eta_d - eta_bar)(eta_d - eta_bar)^T.
inline NiwPosterior niw_posterior(const Matrix& eta, const Hyperparams& hyper) {
  const auto d = static_cast<double>(eta.rows());
  if (eta.rows() < 1) throw std::invalid_argument("update_niw: need at least one document");
  if (eta.cols() != hyper.k) throw std::invalid_argument("update_niw: eta has wrong width");
  const Vector eta_bar = eta.colwise().mean().transpose();
  const Matrix centered = eta.rowwise() - eta_bar.transpose();
  const Matrix q = centered.transpose() * centered;
  const Vector diff = eta_bar - hyper.mu0;
  NiwPosterior post;
  post.kappa_prime = hyper.kappa0 + d;
  post.nu_prime = hyper.nu0 + d;
  post.mu_prime = (d * eta_bar + hyper.kappa0 * hyper.mu0) / (d + hyper.kappa0);
  post.psi_prime = hyper.psi0 + q + (hyper.kappa0 * d / (hyper.kappa0 + d)) * diff * diff.transpose();
  post.psi_prime = 0.5 * (post.psi_prime + post.psi_prime.transpose());
  return post;
}

struct MuSigma {
  Vector mu;
  Matrix sigma;
};

/// Sigma ~ IW(Psi', nu'), then mu ~ MVN(mu', Sigma / kappa').
inline MuSigma update_niw(const Matrix& eta, const Hyperparams& hyper, RngStream& rng) {
  const NiwPosterior post = niw_posterior(eta, hyper);
  MuSigma out;
  out.sigma = sample_inverse_wishart(post.psi_prime, post.nu_prime, rng);
  out.mu = sample_mvn({post.mu_prime, out.sigma / post.kappa_prime}, rng);
  return out;
}

struct IterationRecord {
  std::size_t iteration = 0;
  double loglik = 0.0;
  double wall_seconds = 0.0;
};

/// Log-likelihood trace plus running summaries of the retained
/// (post-burn-in, thinned) samples.
struct FitReport {
  std::vector<IterationRecord> trace;
  std::size_t retained = 0;
  Matrix eta_sum;
  Vector mu_sum;
  std::vector<Matrix> sigma_samples;

  Matrix eta_mean() const { return eta_sum / static_cast<double>(retained); }
  Vector mu_mean() const { return mu_sum / static_cast<double>(retained); }
};

inline void write_fit_csv(std::ostream& out, const FitReport& report) {
  const auto old = out.precision(17);
  out << "iteration,loglik,wall_seconds\n";
  for (const auto& r : report.trace)
    out << r.iteration << ',' << r.loglik << ',' << r.wall_seconds << '\n';
  out.precision(old);
}

struct RunCallbacks {
  /// Called after every sweep; returning false stops the run early.
  std::function<bool(const IterationRecord&)> on_iteration;
  /// Called every hyper.checkpoint_every sweeps and after the last one.
  std::function<void(const ModelState&, const FitReport&)> on_checkpoint;
};

struct FitResult {
  ModelState state;
  FitReport report;
  bool completed = false;  ///< reached hyper.n_iters
};

/// Runs sweeps until state.iteration == hyper.n_iters. Pass a previous
/// FitResult to continue from a checkpoint.
inline FitResult run(const Corpus& corpus, const Hyperparams& hyper,
                     const RunCallbacks& callbacks = {},
                     std::optional<FitResult> resume = std::nullopt) {
  hyper.validate();
  corpus.validate();
  FitResult fit;
  if (resume) {
    fit = std::move(*resume);
    if (fit.state.num_topics() != hyper.k || fit.state.z.size() != corpus.num_docs())
      throw std::invalid_argument("run: resume state does not match corpus/hyperparameters");
    fit.state.tally(corpus, hyper.k);
    fit.state.refresh_theta();
  } else {
    fit.state = init_state(corpus, hyper);
  }
  auto& st = fit.state;
  auto& rep = fit.report;
  if (rep.retained == 0) {
    rep.eta_sum = Matrix::Zero(st.eta.rows(), st.eta.cols());
    rep.mu_sum = Vector::Zero(hyper.k);
  }
  const double elapsed_before = rep.trace.empty() ? 0.0 : rep.trace.back().wall_seconds;
  const auto start = std::chrono::steady_clock::now();

  while (st.iteration < hyper.n_iters) {
    const std::size_t it = st.iteration + 1;
    sweep_eta(st, corpus, hyper, it);
    sweep_z(st, corpus, hyper, it);
    RngStream niw_rng = phase_stream(hyper.seed, it, Phase::niw, 0);
    auto [mu, sigma] = update_niw(st.eta, hyper, niw_rng);
    st.mu = std::move(mu);
    st.sigma = std::move(sigma);
    st.iteration = it;

    if (it > hyper.burn_in && (it - hyper.burn_in) % hyper.thin == 0) {
      rep.eta_sum += st.eta;
      rep.mu_sum += st.mu;
      rep.sigma_samples.push_back(st.sigma);
      ++rep.retained;
    }
    IterationRecord record{it, loglikelihood(st, corpus, hyper.beta),
                           elapsed_before + std::chrono::duration<double>(
                                                std::chrono::steady_clock::now() - start)
                                                .count()};
    rep.trace.push_back(record);

    const bool last = it == hyper.n_iters;
    if (callbacks.on_checkpoint &&
        (last || (hyper.checkpoint_every > 0 && it % hyper.checkpoint_every == 0)))
      callbacks.on_checkpoint(st, rep);
    if (callbacks.on_iteration && !callbacks.on_iteration(record)) break;
  }
  fit.completed = st.iteration == hyper.n_iters;
  return fit;
}

/// Log-likelihood at the posterior-mean eta of the retained samples (the
/// current eta if nothing was retained yet) and the current counts.
inline double posterior_loglikelihood(const FitResult& fit, const Corpus& corpus, double beta) {
  if (fit.report.retained == 0) return loglikelihood(fit.state, corpus, beta);
  return loglikelihood(fit.state, corpus, beta, fit.report.eta_mean());
}

}  // namespace pnctm
