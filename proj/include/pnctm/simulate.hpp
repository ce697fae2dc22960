#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnctm/corpus.hpp"
#include "pnctm/distributions.hpp"
#include "pnctm/do_probit.hpp"
#include "pnctm/model.hpp"

namespace pnctm {

/// A simulated corpus with every latent quantity that produced it.
struct SyntheticCorpus {
  Corpus corpus;
  Matrix topic_word;  ///< K x V, rows sum to 1
  Matrix eta;         ///< D x K
  Matrix theta;       ///< D x K
  std::vector<std::vector<TopicLabel>> z;
};

/// eta_d ~ MVN(prior), theta_d = do_theta(eta_d), z_n ~ Cat(theta_d),
/// w_n ~ Cat(topic_word row z_n), for D documents of doc_length words.
inline SyntheticCorpus simulate_corpus(const MvnParams& eta_prior, const Matrix& topic_word,
                                       std::size_t num_docs, std::size_t doc_length,
                                       RngStream& rng) {
  const auto k = topic_word.rows();
  const auto v = topic_word.cols();
  if (k < 2) throw std::invalid_argument("simulate_corpus: need at least two topics");
  if (v < 1) throw std::invalid_argument("simulate_corpus: empty vocabulary");
  if (eta_prior.mean.size() != k)
    throw std::invalid_argument("simulate_corpus: prior dimension differs from topic count");
  if (doc_length == 0) throw std::invalid_argument("simulate_corpus: doc_length must be > 0");
  for (Eigen::Index t = 0; t < k; ++t) {
    if ((topic_word.row(t).array() < 0.0).any() || !topic_word.row(t).allFinite() ||
        std::abs(topic_word.row(t).sum() - 1.0) > 1e-9)
      throw std::invalid_argument("simulate_corpus: topic_word row " + std::to_string(t) +
                                  " is not a probability vector");
  }
  const MvnSampler prior(eta_prior);
  SyntheticCorpus out;
  out.topic_word = topic_word;
  out.eta.resize(static_cast<Eigen::Index>(num_docs), k);
  out.theta.resize(static_cast<Eigen::Index>(num_docs), k);
  out.corpus.vocab_size = static_cast<std::size_t>(v);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(k));
  for (Eigen::Index t = 0; t < k; ++t) {
    const Vector row = topic_word.row(t).transpose();
    rows[static_cast<std::size_t>(t)].assign(row.data(), row.data() + v);
  }

  for (std::size_t d = 0; d < num_docs; ++d) {
    const Vector eta = prior(rng);
    const Vector theta = do_theta(eta);
    const std::vector<double> theta_w(theta.data(), theta.data() + k);
    out.eta.row(static_cast<Eigen::Index>(d)) = eta.transpose();
    out.theta.row(static_cast<Eigen::Index>(d)) = theta.transpose();
    std::vector<TopicLabel> labels(doc_length);
    std::vector<TermId> words(doc_length);
    for (std::size_t n = 0; n < doc_length; ++n) {
      labels[n] = static_cast<TopicLabel>(sample_categorical(theta_w, rng));
      const auto& phi = rows[static_cast<std::size_t>(labels[n])];
      words[n] = static_cast<TermId>(sample_categorical(phi, rng));
    }
    out.z.push_back(std::move(labels));
    out.corpus.docs.push_back(std::move(words));
    out.corpus.doc_ids.push_back(std::to_string(d + 1));
  }
  return out;
}

/// Uses the prior-mean Gaussian of `hyper` for eta.
inline SyntheticCorpus simulate_corpus(const Hyperparams& hyper, const Matrix& topic_word,
                                       std::size_t num_docs, std::size_t doc_length,
                                       RngStream& rng) {
  if (hyper.k < 2) throw std::invalid_argument("simulate_corpus: need at least two topics");
  if (topic_word.rows() != hyper.k)
    throw std::invalid_argument("simulate_corpus: topic_word must have K rows");
  return simulate_corpus(MvnParams{hyper.mu0, hyper.prior_sigma()}, topic_word, num_docs,
                         doc_length, rng);
}

/// Well-separated topics: topic k puts `purity` of its mass uniformly on
/// its own contiguous block of V/K terms and spreads the rest uniformly
/// over the whole vocabulary.
inline Matrix block_topics(int k, int v, double purity) {
  if (k < 1 || v < k) throw std::invalid_argument("block_topics: need V >= K >= 1");
  if (!(purity >= 0.0 && purity <= 1.0)) throw std::invalid_argument("block_topics: purity in [0,1]");
  Matrix phi = Matrix::Constant(k, v, (1.0 - purity) / v);
  for (int t = 0; t < k; ++t) {
    const int begin = v * t / k, end = v * (t + 1) / k;
    for (int w = begin; w < end; ++w) phi(t, w) += purity / (end - begin);
  }
  return phi;
}

/// Term names "w0", "w1", ... for simulated corpora.
inline Vocabulary synthetic_vocabulary(std::size_t v) {
  std::vector<std::string> terms;
  for (std::size_t i = 0; i < v; ++i) terms.push_back("w" + std::to_string(i));
  return Vocabulary(std::move(terms));
}

}  // namespace pnctm
