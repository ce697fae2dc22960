// pnctm command-line interface: fit, topics, corr, sweep, simulate, bench.

#include <CLI11.hpp>

#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pnctm/pnctm.hpp"

namespace fs = std::filesystem;
using namespace pnctm;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_exists(const std::string& path, const char* flag) {
  if (!path.empty() && !fs::exists(path))
    throw UsageError(std::string(flag) + ": no such file or directory: " + path);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) throw UsageError("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

// ---- corpus flags ----

struct CorpusOptions {
  std::string bow, vocab, text_dir, stopwords;
  bool one_doc_per_line = false;
  std::size_t min_doc_freq = 5;
  double max_doc_frac = 0.5;
  CLI::Option* min_df_opt = nullptr;
  CLI::Option* max_df_opt = nullptr;
  CLI::Option* stop_opt = nullptr;

  void add(CLI::App& app) {
    app.add_option("--bow", bow, "UCI docword file");
    app.add_option("--vocab", vocab, "vocabulary file, one term per line (with --bow)");
    app.add_option("--text-dir", text_dir, "plain-text file or directory of .txt files");
    app.add_flag("--one-doc-per-line", one_doc_per_line, "each line of the text input is a document");
    min_df_opt = app.add_option("--min-doc-freq", min_doc_freq,
                                "drop terms in fewer documents (text input; bow only when given)");
    max_df_opt = app.add_option("--max-doc-frac", max_doc_frac,
                                "drop terms in a larger fraction of documents (text input; bow only when given)");
    stop_opt = app.add_option("--stopwords", stopwords, "file of stopwords, one per line");
  }

  void check() const {
    if (bow.empty() == text_dir.empty())
      throw UsageError("give exactly one of --bow (with --vocab) or --text-dir");
    if (!bow.empty() && vocab.empty()) throw UsageError("--bow requires --vocab");
    require_exists(bow, "--bow");
    require_exists(vocab, "--vocab");
    require_exists(text_dir, "--text-dir");
    require_exists(stopwords, "--stopwords");
  }

  LoadedCorpus load() const {
    LoadedCorpus raw = bow.empty() ? load_plain_text(text_dir, {one_doc_per_line})
                                   : load_uci_bow(bow, vocab);
    const bool prune = bow.empty() || min_df_opt->count() > 0 || max_df_opt->count() > 0 ||
                       stop_opt->count() > 0;
    if (!prune) return raw;
    PruneConfig cfg;
    cfg.min_doc_freq = bow.empty() || min_df_opt->count() > 0 ? min_doc_freq : 1;
    cfg.max_doc_frac = bow.empty() || max_df_opt->count() > 0 ? max_doc_frac : 1.0;
    if (!stopwords.empty()) cfg.stopwords = load_vocabulary(stopwords).terms();
    auto result = prune_vocabulary(raw.corpus, raw.vocab, cfg);
    if (!result.dropped_docs.empty())
      std::cerr << "pruning dropped " << result.dropped_docs.size() << " empty documents\n";
    std::cerr << "corpus: " << result.pruned.corpus.num_docs() << " documents, "
              << result.pruned.vocab.size() << " terms (from " << raw.vocab.size() << ")\n";
    return std::move(result.pruned);
  }
};

// ---- sampler flags ----

struct HyperOptions {
  int k = 10;
  std::size_t iters = 1000, thin = 10, threads = 1, checkpoint_every = 100;
  std::size_t burn_in = 0;
  double beta = 0.01, kappa0 = 1.0, nu0 = 0.0;
  std::uint64_t seed = 20240601;
  std::string eta_kernel = to_string(EtaKernel::elliptical_slice);
  bool partitioned_z = false;
  CLI::Option* burn_opt = nullptr;
  CLI::Option* nu0_opt = nullptr;

  void add(CLI::App& app, bool with_k) {
    if (with_k) app.add_option("--k", k, "number of topics")->check(CLI::Range(2, 100000));
    app.add_option("--iters", iters, "total Gibbs sweeps")->check(CLI::PositiveNumber);
    burn_opt = app.add_option("--burn-in", burn_in, "sweeps discarded before retaining samples")
                   ->default_str("iters/2");
    app.add_option("--thin", thin, "keep every thin-th sweep after burn-in")->check(CLI::PositiveNumber);
    app.add_option("--beta", beta, "symmetric Dirichlet concentration of topic-word rows")
        ->check(CLI::PositiveNumber);
    app.add_option("--kappa0", kappa0, "NIW prior mean scaling")->check(CLI::PositiveNumber);
    nu0_opt = app.add_option("--nu0", nu0, "NIW degrees of freedom")->default_str("K+2");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--threads", threads, "threads for the document-parallel eta phase")
        ->check(CLI::PositiveNumber);
    app.add_option("--checkpoint-every", checkpoint_every, "checkpoint period in sweeps (0 = only at the end)");
    app.add_option("--eta-kernel", eta_kernel, "eta update")
        ->check(CLI::IsMember({"elliptical-slice", "orthant-conjugate-exact", "orthant-conjugate"}));
    app.add_flag("--partitioned-z", partitioned_z, "parallel z sweep with merged count deltas (approximate)");
  }

  Hyperparams build(int topics) const {
    Hyperparams h = Hyperparams::defaults(topics);
    h.n_iters = iters;
    h.burn_in = burn_opt->count() > 0 ? burn_in : iters / 2;
    h.thin = thin;
    h.beta = beta;
    h.kappa0 = kappa0;
    if (nu0_opt->count() > 0) h.nu0 = nu0;
    h.seed = seed;
    h.threads = threads;
    h.checkpoint_every = checkpoint_every;
    h.eta_kernel = eta_kernel_from_string(eta_kernel);
    h.partitioned_z = partitioned_z;
    h.validate();
    return h;
  }
};

std::vector<std::string> terms_of(const Vocabulary& v) { return v.terms(); }

Vocabulary vocabulary_for(const Checkpoint& cp, const std::string& override_path) {
  if (!override_path.empty()) return load_vocabulary(override_path);
  if (!cp.vocab_terms.empty()) return Vocabulary(cp.vocab_terms);
  return synthetic_vocabulary(static_cast<std::size_t>(cp.fit.state.topic_word_counts.cols()));
}

// ---- fit ----

struct FitOptions {
  CorpusOptions corpus;
  HyperOptions hyper;
  std::string out, resume;
  bool quiet = false;
};

int cmd_fit(const FitOptions& o, CLI::Option* iters_opt, CLI::Option* threads_opt) {
  o.corpus.check();
  require_exists(o.resume, "--resume");
  ensure_dir(o.out);
  const fs::path out = o.out;
  const fs::path failed_marker = out / "FAILED";
  fs::remove(failed_marker);

  try {
    const LoadedCorpus data = o.corpus.load();
    Hyperparams hyper;
    std::optional<FitResult> resume;
    if (!o.resume.empty()) {
      Checkpoint cp = load_checkpoint(o.resume);
      if (!cp.vocab_terms.empty() && cp.vocab_terms != terms_of(data.vocab))
        throw std::runtime_error("--resume: checkpoint vocabulary differs from the corpus vocabulary");
      attach_corpus(cp, data.corpus);
      hyper = cp.hyper;
      if (iters_opt->count() > 0) hyper.n_iters = o.hyper.iters;
      if (threads_opt->count() > 0) hyper.threads = o.hyper.threads;
      if (hyper.n_iters < cp.fit.state.iteration)
        throw UsageError("--iters is below the checkpoint iteration " +
                         std::to_string(cp.fit.state.iteration));
      hyper.validate();
      std::cerr << "resuming at iteration " << cp.fit.state.iteration << " of " << hyper.n_iters << '\n';
      resume = std::move(cp.fit);
    } else {
      hyper = o.hyper.build(o.hyper.k);
    }

    const auto vocab_terms = terms_of(data.vocab);
    RunCallbacks cb;
    cb.on_iteration = [&](const IterationRecord& r) {
      if (!o.quiet) {
        char line[96];
        std::snprintf(line, sizeof line, "iter %zu loglik %.6f\n", r.iteration, r.loglik);
        std::cerr << line;
      }
      return true;
    };
    cb.on_checkpoint = [&](const ModelState& st, const FitReport& rep) {
      Checkpoint cp{hyper, {st, rep, st.iteration == hyper.n_iters}, vocab_terms};
      save_checkpoint(out / "checkpoint", cp);
    };

    const FitResult fit = run(data.corpus, hyper, cb, std::move(resume));
    {
      auto f = open_out(out / "fit.csv");
      write_fit_csv(f, fit.report);
    }
    save_checkpoint(out / "state", Checkpoint{hyper, fit, vocab_terms}, false);
    std::cerr << "posterior loglik " << posterior_loglikelihood(fit, data.corpus, hyper.beta) << '\n';
    return 0;
  } catch (...) {
    std::ofstream marker(failed_marker);
    marker << "fit did not complete; files in this directory may be partial\n";
    throw;
  }
}

// ---- topics / corr ----

int cmd_topics(const std::string& state_path, const std::string& vocab_path, std::size_t top,
               const std::string& out_path) {
  if (state_path.empty()) throw UsageError("--state is required");
  require_exists(state_path, "--state");
  require_exists(vocab_path, "--vocab");
  const Checkpoint cp = load_checkpoint(state_path);
  const Vocabulary vocab = vocabulary_for(cp, vocab_path);
  if (vocab.size() != static_cast<std::size_t>(cp.fit.state.topic_word_counts.cols()))
    throw std::runtime_error("vocabulary size does not match the fitted state");
  if (top == 0 || top > vocab.size())
    throw UsageError("--top must be in [1, " + std::to_string(vocab.size()) + "]");
  const TopicReport report = top_words(cp.fit.state, vocab, cp.hyper.beta, top);
  if (out_path.empty()) {
    write_topic_report(std::cout, report);
  } else {
    auto f = open_out(out_path);
    write_topic_report(f, report);
  }
  return 0;
}

int cmd_corr(const std::string& state_path, double threshold, const std::string& out_dir) {
  if (state_path.empty()) throw UsageError("--state is required");
  require_exists(state_path, "--state");
  ensure_dir(out_dir);
  const Checkpoint cp = load_checkpoint(state_path);
  if (cp.fit.report.sigma_samples.empty())
    throw std::runtime_error("state has no retained covariance samples (run past --burn-in)");
  const CorrelationMatrix corr = topic_correlations(cp.fit.report.sigma_samples);
  if (corr.clamped) std::cerr << "warning: averaged covariance was not SPD; eigenvalues clamped\n";
  {
    auto f = open_out(fs::path(out_dir) / "corr.csv");
    write_matrix_csv(f, corr.values);
  }
  {
    auto f = open_out(fs::path(out_dir) / "edges.csv");
    write_edges_csv(f, corr.edges(threshold));
  }
  return 0;
}

// ---- sweep ----

int cmd_sweep(const CorpusOptions& co, const HyperOptions& ho, const std::vector<int>& k_list,
              const std::string& out_dir) {
  co.check();
  ensure_dir(out_dir);
  for (int k : k_list)
    if (k < 2) throw UsageError("--k-list entries must be >= 2");
  const LoadedCorpus data = co.load();
  const Hyperparams tmpl = ho.build(k_list.front());
  const SweepResult result = sweep_k(data.corpus, tmpl, k_list);
  auto f = open_out(fs::path(out_dir) / "sweep.csv");
  write_sweep_csv(f, result);
  std::cout << "best K " << result.best_k << '\n';
  return 0;
}

// ---- simulate ----

struct SimOptions {
  int k = 3, v = 50;
  std::size_t docs = 200, len = 100;
  double purity = 0.9;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_simulate(const SimOptions& o) {
  ensure_dir(o.out);
  if (o.v < o.k) throw UsageError("--v must be >= --k");
  const Hyperparams hyper = Hyperparams::defaults(o.k);
  RngStream rng(o.seed, 0);
  const Matrix phi = block_topics(o.k, o.v, o.purity);
  const SyntheticCorpus sim = simulate_corpus(hyper, phi, o.docs, o.len, rng);
  const fs::path out = o.out;
  {
    auto f = open_out(out / "docword.txt");
    write_uci_bow(f, sim.corpus);
  }
  {
    auto f = open_out(out / "vocab.txt");
    write_vocabulary(f, synthetic_vocabulary(static_cast<std::size_t>(o.v)));
  }
  nlohmann::json truth = {
      {"k", o.k},
      {"v", o.v},
      {"docs", o.docs},
      {"len", o.len},
      {"purity", o.purity},
      {"seed", o.seed},
      {"mu", detail::to_json(hyper.mu0)},
      {"sigma", detail::to_json(hyper.prior_sigma())},
      {"topic_word", detail::to_json(sim.topic_word)},
      {"eta", detail::to_json(sim.eta)},
      {"theta", detail::to_json(sim.theta)},
      {"z", sim.z},
  };
  auto f = open_out(out / "truth.json");
  f << truth.dump() << '\n';
  return 0;
}

// ---- bench ----

struct BenchOptions {
  std::vector<int> k_list{10, 20, 30, 40};
  std::size_t words = 100, reps = 5, mc_samples = 1000, max_attempts = 10000;
  std::uint64_t seed = 20240601;
  std::string out;
};

int cmd_bench(const BenchOptions& o) {
  MnpConfig cfg;
  cfg.mc_samples = o.mc_samples;
  cfg.max_rejection_attempts = o.max_attempts;
  cfg.validate();
  if (!o.out.empty()) ensure_dir(o.out);
  const auto rows = bench_compare(o.k_list, o.words, o.reps, cfg, o.seed);
  write_bench_table(std::cout, rows);
  if (!o.out.empty()) {
    auto csv = open_out(fs::path(o.out) / "bench.csv");
    write_bench_csv(csv, rows);
    auto txt = open_out(fs::path(o.out) / "bench.txt");
    write_bench_table(txt, rows);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlated topic model with diagonal-orthant probit Gibbs sampling"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model; writes OUT/{checkpoint,fit.csv,state}");
  fit.corpus.add(*fit_cmd);
  fit.hyper.add(*fit_cmd, true);
  fit_cmd->add_option("--out", fit.out, "output directory")->required();
  fit_cmd->add_option("--resume", fit.resume, "continue from a checkpoint file");
  fit_cmd->add_flag("--quiet", fit.quiet, "suppress per-iteration log-likelihood lines");
  CLI::Option* iters_opt = fit_cmd->get_option("--iters");
  CLI::Option* threads_opt = fit_cmd->get_option("--threads");

  std::string state_path, vocab_override, topics_out;
  std::size_t top = 10;
  auto* topics_cmd = app.add_subcommand("topics", "top words per topic as TSV");
  topics_cmd->add_option("--state", state_path, "fitted state file")->required();
  topics_cmd->add_option("--vocab", vocab_override, "vocabulary file (default: stored in state)");
  topics_cmd->add_option("--top", top, "words per topic");
  topics_cmd->add_option("--out", topics_out, "output file (default stdout)");

  std::string corr_state, corr_out;
  double threshold = 0.1;
  auto* corr_cmd = app.add_subcommand("corr", "topic correlation matrix and edge list");
  corr_cmd->add_option("--state", corr_state, "fitted state file")->required();
  corr_cmd->add_option("--corr-threshold", threshold, "minimum |r| for the edge list");
  corr_cmd->add_option("--out", corr_out, "output directory for corr.csv and edges.csv")->required();

  CorpusOptions sweep_corpus;
  HyperOptions sweep_hyper;
  std::vector<int> k_list{2, 3, 6};
  std::string sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "log-likelihood across numbers of topics");
  sweep_corpus.add(*sweep_cmd);
  sweep_hyper.add(*sweep_cmd, false);
  sweep_cmd->add_option("--k-list", k_list, "comma-separated topic counts")->delimiter(',');
  sweep_cmd->add_option("--out", sweep_out, "output directory for sweep.csv")->required();

  SimOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "synthetic corpus with block topics");
  sim_cmd->add_option("--k", sim.k, "number of topics")->check(CLI::Range(2, 100000));
  sim_cmd->add_option("--v", sim.v, "vocabulary size")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--docs", sim.docs, "number of documents")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--len", sim.len, "words per document")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--purity", sim.purity, "mass of each topic on its own term block")
      ->check(CLI::Range(0.0, 1.0));
  sim_cmd->add_option("--seed", sim.seed, "random seed");
  sim_cmd->add_option("--out", sim.out, "output directory")->required();

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "MNP vs diagonal-orthant timing table");
  bench_cmd->add_option("--k", bench.k_list, "comma-separated topic counts")->delimiter(',');
  bench_cmd->add_option("--words-per-doc", bench.words, "labels per document for the aux task");
  bench_cmd->add_option("--reps", bench.reps, "documents timed per K");
  bench_cmd->add_option("--mc-samples", bench.mc_samples, "Monte Carlo draws for MNP theta");
  bench_cmd->add_option("--max-attempts", bench.max_attempts, "MNP rejection attempt cap");
  bench_cmd->add_option("--seed", bench.seed, "random seed");
  bench_cmd->add_option("--out", bench.out, "output directory for bench.csv and bench.txt");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) return cmd_fit(fit, iters_opt, threads_opt);
    if (*topics_cmd) return cmd_topics(state_path, vocab_override, top, topics_out);
    if (*corr_cmd) return cmd_corr(corr_state, threshold, corr_out);
    if (*sweep_cmd) return cmd_sweep(sweep_corpus, sweep_hyper, k_list, sweep_out);
    if (*sim_cmd) return cmd_simulate(sim);
    if (*bench_cmd) return cmd_bench(bench);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
