#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pnctm/corpus.hpp"
#include "pnctm/model.hpp"

namespace pnctm {

/// In-sample log-likelihood sum_d sum_n log sum_k theta_dk phi_k(w_dn) for
/// topic-word matrix `phi` (K x V) and theta_d = do_theta(eta_point row d).
inline double loglikelihood(const Matrix& phi, const Corpus& corpus, const Matrix& eta_point) {
  const auto k = phi.rows();
  if (k < 2 || phi.cols() != static_cast<Eigen::Index>(corpus.vocab_size) ||
      eta_point.rows() != static_cast<Eigen::Index>(corpus.num_docs()) || eta_point.cols() != k)
    throw std::invalid_argument("loglikelihood: state is not fitted to this corpus");
  double total = 0.0;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const Vector theta = do_theta(Vector(eta_point.row(static_cast<Eigen::Index>(d)).transpose()));
    for (TermId w : corpus.docs[d]) total += std::log(phi.col(w).dot(theta));
  }
  return total;
}

/// Same, with phi the posterior-mean topic-word matrix of the state's
/// current counts.
inline double loglikelihood(const ModelState& state, const Corpus& corpus, double beta,
                            const Matrix& eta_point) {
  if (state.topic_word_counts.cols() != static_cast<Eigen::Index>(corpus.vocab_size))
    throw std::invalid_argument("loglikelihood: state is not fitted to this corpus");
  return loglikelihood(topic_word_posterior(state, beta), corpus, eta_point);
}

inline double loglikelihood(const ModelState& state, const Corpus& corpus, double beta) {
  return loglikelihood(state, corpus, beta, state.eta);
}

struct RankedTerm {
  TermId id;
  std::string term;
  double prob;
};

/// Per topic, the top-M terms ranked by posterior probability.
struct TopicReport {
  std::vector<std::vector<RankedTerm>> topics;
};

/// Ties are broken by ascending term id.
inline TopicReport top_words(const Matrix& phi, const Vocabulary& vocab, std::size_t m) {
  if (static_cast<std::size_t>(phi.cols()) != vocab.size())
    throw std::invalid_argument("top_words: vocabulary size mismatch");
  if (m > vocab.size()) throw std::invalid_argument("top_words: M exceeds vocabulary size");
  TopicReport report;
  for (Eigen::Index k = 0; k < phi.rows(); ++k) {
    std::vector<TermId> order(vocab.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](TermId a, TermId b) { return phi(k, a) > phi(k, b); });
    std::vector<RankedTerm> row;
    for (std::size_t r = 0; r < m; ++r)
      row.push_back({order[r], vocab.term(order[r]), phi(k, order[r])});
    report.topics.push_back(std::move(row));
  }
  return report;
}

inline TopicReport top_words(const ModelState& state, const Vocabulary& vocab, double beta,
                             std::size_t m) {
  return top_words(topic_word_posterior(state, beta), vocab, m);
}

/// TSV with header: topic, rank, term, prob (topic and rank 0-based).
inline void write_topic_report(std::ostream& out, const TopicReport& report) {
  out << "topic\trank\tterm\tprob\n";
  for (std::size_t k = 0; k < report.topics.size(); ++k)
    for (std::size_t r = 0; r < report.topics[k].size(); ++r)
      out << k << '\t' << r << '\t' << report.topics[k][r].term << '\t'
          << report.topics[k][r].prob << '\n';
}

struct CorrelationEdge {
  int i, j;
  double r;
};

struct CorrelationMatrix {
  Matrix values;
  bool clamped = false;  ///< averaged covariance needed eigenvalue clamping

  /// Pairs i < j with |r_ij| >= threshold.
  std::vector<CorrelationEdge> edges(double threshold) const {
    std::vector<CorrelationEdge> out;
    for (Eigen::Index i = 0; i < values.rows(); ++i)
      for (Eigen::Index j = i + 1; j < values.cols(); ++j)
        if (std::abs(values(i, j)) >= threshold)
          out.push_back({static_cast<int>(i), static_cast<int>(j), values(i, j)});
    return out;
  }
};

/// R_ij = S_ij / sqrt(S_ii S_jj). A covariance that is not positive
/// definite has its eigenvalues clamped to a tiny positive floor first.
inline CorrelationMatrix correlation_from_covariance(const Matrix& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0)
    throw std::invalid_argument("topic_correlations: covariance must be square");
  CorrelationMatrix out;
  Matrix s = 0.5 * (cov + cov.transpose());
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    const double floor = 1e-12 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    const Vector clamped = eig.eigenvalues().cwiseMax(floor);
    s = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    out.clamped = true;
  }
  const auto k = s.rows();
  out.values.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    out.values(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double r = std::clamp(s(i, j) / std::sqrt(s(i, i) * s(j, j)), -1.0, 1.0);
      out.values(i, j) = r;
      out.values(j, i) = r;
    }
  }
  return out;
}

/// Correlation of the average of the retained Sigma samples.
inline CorrelationMatrix topic_correlations(std::span<const Matrix> sigma_samples) {
  if (sigma_samples.empty()) throw std::invalid_argument("topic_correlations: no Sigma samples");
  Matrix mean = Matrix::Zero(sigma_samples[0].rows(), sigma_samples[0].cols());
  for (const auto& s : sigma_samples) mean += s;
  return correlation_from_covariance(mean / static_cast<double>(sigma_samples.size()));
}

inline void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

inline void write_edges_csv(std::ostream& out, const std::vector<CorrelationEdge>& edges) {
  out << "i,j,r\n";
  for (const auto& e : edges) out << e.i << ',' << e.j << ',' << e.r << '\n';
}

}  // namespace pnctm
