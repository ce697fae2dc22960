#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pnctm/corpus.hpp"
#include "pnctm/distributions.hpp"
#include "pnctm/do_probit.hpp"
#include "pnctm/rng.hpp"

namespace pnctm {

using CountMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CountVector = Eigen::VectorXi;

/// Random-stream phases; one substream per (iteration, phase, index).
enum class Phase : std::uint64_t { init = 1, eta = 2, z = 3, niw = 4, loglik = 5 };

inline RngStream phase_stream(std::uint64_t seed, std::size_t iteration, Phase phase,
                              std::size_t index) {
  return RngStream(seed, stream_key(iteration, static_cast<std::uint64_t>(phase), index));
}

/// How sweep_eta updates eta_d.
enum class EtaKernel {
  /// Y_d from sign-truncated normals, then the conjugate Gaussian draw.
  /// Its stationary law carries an extra factor c(eta)^{N_d}, where c is
  /// the diagonal-orthant mass, relative to the labels' likelihood.
  orthant_conjugate,
  /// As above plus the draws that fall outside every diagonal orthant
  /// (see sample_rejected_draws), which cancels c(eta)^{-N_d} exactly.
  /// Cost per word grows like 1 / c(eta).
  orthant_conjugate_exact,
  /// Elliptical slice sampling on prior * prod_n theta_{z_n}(eta).
  elliptical_slice,
};

inline const char* to_string(EtaKernel k) {
  switch (k) {
    case EtaKernel::orthant_conjugate: return "orthant-conjugate";
    case EtaKernel::orthant_conjugate_exact: return "orthant-conjugate-exact";
    case EtaKernel::elliptical_slice: return "elliptical-slice";
  }
  return "?";
}

inline EtaKernel eta_kernel_from_string(const std::string& name) {
  for (auto k : {EtaKernel::orthant_conjugate, EtaKernel::orthant_conjugate_exact,
                 EtaKernel::elliptical_slice})
    if (name == to_string(k)) return k;
  throw std::invalid_argument("unknown eta kernel '" + name + "'");
}

/// Model dimensions, priors and sampler schedule.
struct Hyperparams {
  int k = 2;
  double beta = 0.01;  ///< symmetric Dirichlet concentration per term
  Vector mu0;
  double kappa0 = 1.0;
  Matrix psi0;
  double nu0 = 4.0;
  std::size_t n_iters = 1000;
  std::size_t burn_in = 500;
  std::size_t thin = 10;
  std::uint64_t seed = 20240601;
  std::size_t threads = 1;             ///< document-parallel eta phase
  std::size_t checkpoint_every = 100;  ///< 0 disables periodic checkpoints
  bool partitioned_z = false;          ///< approximate parallel z sweep
  EtaKernel eta_kernel = EtaKernel::elliptical_slice;
  std::size_t max_rejected_draws = 10'000'000;  ///< per document, exact orthant kernel

  /// beta = 0.01, mu0 = 0, kappa0 = 1, Psi0 = I, nu0 = K + 2.
  static Hyperparams defaults(int k) {
    Hyperparams h;
    h.k = k;
    h.mu0 = Vector::Zero(k);
    h.psi0 = Matrix::Identity(k, k);
    h.nu0 = k + 2.0;
    return h;
  }

  void validate() const {
    if (k < 2) throw std::invalid_argument("hyperparams: K must be >= 2");
    if (!(beta > 0.0)) throw std::invalid_argument("hyperparams: beta must be > 0");
    if (!(kappa0 > 0.0)) throw std::invalid_argument("hyperparams: kappa0 must be > 0");
    if (!(nu0 > k - 1.0)) throw std::invalid_argument("hyperparams: nu0 must exceed K - 1");
    if (mu0.size() != k || psi0.rows() != k || psi0.cols() != k)
      throw std::invalid_argument("hyperparams: mu0/psi0 dimensions must equal K");
    if (burn_in >= n_iters) throw std::invalid_argument("hyperparams: burn_in must be < n_iters");
    if (thin == 0) throw std::invalid_argument("hyperparams: thin must be >= 1");
    cholesky_lower(psi0, "hyperparams psi0");
  }

  /// Psi0 / (nu0 - K - 1) when that mean exists, identity otherwise.
  Matrix prior_sigma() const {
    if (nu0 > k + 1.0) return psi0 / (nu0 - k - 1.0);
    return Matrix::Identity(k, k);
  }
};

/// Sampler state. Rows of eta and theta are documents.
struct ModelState {
  std::vector<std::vector<TopicLabel>> z;
  Matrix eta;    ///< D x K
  Matrix theta;  ///< D x K, do_theta of each eta row
  Vector mu;
  Matrix sigma;
  CountMatrix topic_word_counts;  ///< K x V
  CountVector topic_totals;       ///< K
  std::size_t iteration = 0;      ///< completed sweeps

  int num_topics() const noexcept { return static_cast<int>(mu.size()); }

  /// Rebuilds counts from z.
  void tally(const Corpus& corpus, int k) {
    topic_word_counts = CountMatrix::Zero(k, static_cast<Eigen::Index>(corpus.vocab_size));
    topic_totals = CountVector::Zero(k);
    for (std::size_t d = 0; d < corpus.docs.size(); ++d)
      for (std::size_t n = 0; n < corpus.docs[d].size(); ++n) {
        ++topic_word_counts(z[d][n], corpus.docs[d][n]);
        ++topic_totals[z[d][n]];
      }
  }

  void refresh_theta() {
    theta.resize(eta.rows(), eta.cols());
    for (Eigen::Index d = 0; d < eta.rows(); ++d) {
      const Vector row = eta.row(d).transpose();
      theta.row(d) = do_theta(row).transpose();
    }
  }

  /// Empty string when counts agree exactly with z, else a description.
  std::string check_consistency(const Corpus& corpus) const {
    const int k = num_topics();
    if (z.size() != corpus.docs.size()) return "z has wrong number of documents";
    if (topic_word_counts.rows() != k ||
        topic_word_counts.cols() != static_cast<Eigen::Index>(corpus.vocab_size))
      return "count matrix has wrong shape";
    CountMatrix expect = CountMatrix::Zero(k, static_cast<Eigen::Index>(corpus.vocab_size));
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
      if (z[d].size() != corpus.docs[d].size()) return "z/doc length mismatch";
      for (std::size_t n = 0; n < z[d].size(); ++n) {
        if (z[d][n] < 0 || z[d][n] >= k) return "label out of range";
        ++expect(z[d][n], corpus.docs[d][n]);
      }
    }
    if (expect != topic_word_counts) return "topic-word counts disagree with z";
    if ((topic_word_counts.rowwise().sum() - topic_totals).any()) return "topic totals disagree";
    if ((topic_word_counts.array() < 0).any()) return "negative count";
    return {};
  }
};

/// z uniform, eta from the prior Gaussian, (mu, Sigma) at the prior mean.
inline ModelState init_state(const Corpus& corpus, const Hyperparams& hyper) {
  hyper.validate();
  corpus.validate();
  const int k = hyper.k;
  ModelState s;
  s.mu = hyper.mu0;
  s.sigma = hyper.prior_sigma();
  const MvnSampler prior({hyper.mu0, s.sigma});
  s.eta.resize(static_cast<Eigen::Index>(corpus.num_docs()), k);
  s.z.resize(corpus.num_docs());
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    RngStream rng = phase_stream(hyper.seed, 0, Phase::init, d);
    s.z[d].resize(corpus.docs[d].size());
    for (auto& label : s.z[d]) label = static_cast<TopicLabel>(rng() % static_cast<unsigned>(k));
    s.eta.row(static_cast<Eigen::Index>(d)) = prior(rng).transpose();
  }
  s.tally(corpus, k);
  s.refresh_theta();
  return s;
}

/// Posterior-mean topic-word distributions (C_k^v + beta) / (n_k + V beta).
inline Matrix topic_word_posterior(const ModelState& state, double beta) {
  const auto v = static_cast<double>(state.topic_word_counts.cols());
  Matrix phi = state.topic_word_counts.cast<double>().array() + beta;
  for (Eigen::Index k = 0; k < phi.rows(); ++k) phi.row(k) /= (state.topic_totals[k] + v * beta);
  return phi;
}

}  // namespace pnctm
