// Simulates a small corpus with well-separated topics, fits it and prints
// the recovered top words, the log-likelihood and the topic correlations.
//
//   fit_synthetic [K] [iterations] [seed]

#include <cstdlib>
#include <iostream>

#include "pnctm/pnctm.hpp"

int main(int argc, char** argv) {
  const int k = argc > 1 ? std::atoi(argv[1]) : 3;
  const std::size_t iters = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 500;
  const std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;

  pnctm::Hyperparams hyper = pnctm::Hyperparams::defaults(k);
  hyper.n_iters = iters;
  hyper.burn_in = iters / 2;
  hyper.thin = 5;
  hyper.seed = seed;

  pnctm::RngStream rng(seed, 99);
  const auto sim = pnctm::simulate_corpus(hyper, pnctm::block_topics(k, 50, 0.9), 200, 100, rng);
  const auto vocab = pnctm::synthetic_vocabulary(50);

  const auto fit = pnctm::run(sim.corpus, hyper);
  std::cout << "loglik " << pnctm::posterior_loglikelihood(fit, sim.corpus, hyper.beta) << "\n";
  pnctm::write_topic_report(std::cout, pnctm::top_words(fit.state, vocab, hyper.beta, 5));
  const auto corr = pnctm::topic_correlations(fit.report.sigma_samples);
  pnctm::write_matrix_csv(std::cout, corr.values);
  return 0;
}
