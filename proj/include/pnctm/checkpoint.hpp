#pragma once

// Versioned JSON container for hyperparameters, sampler state, fit report
// and (optionally) the vocabulary. RNG state needs no explicit storage:
// every substream is a pure function of (seed, iteration, phase, index),
// so seed plus iteration index restore it exactly.

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "pnctm/corpus.hpp"
#include "pnctm/gibbs.hpp"
#include "pnctm/model.hpp"

namespace pnctm {

inline constexpr const char* kCheckpointFormat = "pnctm-checkpoint";
inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline json to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw CheckpointError("checkpoint: matrix data size mismatch");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data[static_cast<std::size_t>(i * cols + j2)];
  return m;
}

inline json counts_to_json(const CountMatrix& m) {
  std::vector<int> data(m.data(), m.data() + m.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline CountMatrix counts_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<int>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw CheckpointError("checkpoint: count data size mismatch");
  return Eigen::Map<const CountMatrix>(data.data(), rows, cols);
}

inline json to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Vector vector_from_json(const json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(data.size()));
}

}  // namespace detail

/// Everything needed to resume a fit or report on it.
struct Checkpoint {
  Hyperparams hyper;
  FitResult fit;
  std::vector<std::string> vocab_terms;  ///< may be empty
};

/// With include_timing = false the trace omits wall-clock seconds, so two
/// runs with the same seed serialize to identical bytes.
inline nlohmann::json checkpoint_to_json(const Checkpoint& cp, bool include_timing = true) {
  using detail::to_json;
  using detail::counts_to_json;
  const auto& h = cp.hyper;
  const auto& s = cp.fit.state;
  const auto& r = cp.fit.report;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& rec : r.trace) {
    if (include_timing)
      trace.push_back({rec.iteration, rec.loglik, rec.wall_seconds});
    else
      trace.push_back({rec.iteration, rec.loglik});
  }
  nlohmann::json sigmas = nlohmann::json::array();
  for (const auto& m : r.sigma_samples) sigmas.push_back(to_json(m));
  return {
      {"format", kCheckpointFormat},
      {"version", kCheckpointVersion},
      {"hyper",
       {{"k", h.k}, {"beta", h.beta}, {"mu0", to_json(h.mu0)}, {"kappa0", h.kappa0},
        {"psi0", to_json(h.psi0)}, {"nu0", h.nu0}, {"n_iters", h.n_iters},
        {"burn_in", h.burn_in}, {"thin", h.thin}, {"seed", h.seed}, {"threads", h.threads},
        {"checkpoint_every", h.checkpoint_every}, {"partitioned_z", h.partitioned_z},
        {"eta_kernel", to_string(h.eta_kernel)}, {"max_rejected_draws", h.max_rejected_draws}}},
      {"rng", {{"seed", h.seed}, {"next_iteration", s.iteration + 1}}},
      {"state",
       {{"iteration", s.iteration}, {"z", s.z}, {"eta", to_json(s.eta)}, {"mu", to_json(s.mu)},
        {"sigma", to_json(s.sigma)}, {"topic_word_counts", counts_to_json(s.topic_word_counts)},
        {"completed", cp.fit.completed}}},
      {"report",
       {{"trace", trace}, {"retained", r.retained}, {"eta_sum", to_json(r.eta_sum)},
        {"mu_sum", to_json(r.mu_sum)}, {"sigma_samples", sigmas}}},
      {"vocab", cp.vocab_terms},
  };
}

/// Parses a container. Stored counts are enough for reporting; resuming
/// goes through attach_corpus, which re-tallies them against the corpus.
inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  using namespace detail;
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat)
      throw CheckpointError("not a pnctm checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw CheckpointError("unsupported checkpoint version " +
                            std::to_string(j.at("version").get<int>()));
    Checkpoint cp;
    const auto& jh = j.at("hyper");
    auto& h = cp.hyper;
    h.k = jh.at("k").get<int>();
    h.beta = jh.at("beta").get<double>();
    h.mu0 = vector_from_json(jh.at("mu0"));
    h.kappa0 = jh.at("kappa0").get<double>();
    h.psi0 = matrix_from_json(jh.at("psi0"));
    h.nu0 = jh.at("nu0").get<double>();
    h.n_iters = jh.at("n_iters").get<std::size_t>();
    h.burn_in = jh.at("burn_in").get<std::size_t>();
    h.thin = jh.at("thin").get<std::size_t>();
    h.seed = jh.at("seed").get<std::uint64_t>();
    h.threads = jh.at("threads").get<std::size_t>();
    h.checkpoint_every = jh.at("checkpoint_every").get<std::size_t>();
    h.partitioned_z = jh.at("partitioned_z").get<bool>();
    h.eta_kernel = eta_kernel_from_string(jh.at("eta_kernel").get<std::string>());
    h.max_rejected_draws = jh.at("max_rejected_draws").get<std::size_t>();

    const auto& js = j.at("state");
    auto& s = cp.fit.state;
    s.iteration = js.at("iteration").get<std::size_t>();
    s.z = js.at("z").get<std::vector<std::vector<TopicLabel>>>();
    s.eta = matrix_from_json(js.at("eta"));
    s.mu = vector_from_json(js.at("mu"));
    s.sigma = matrix_from_json(js.at("sigma"));
    s.topic_word_counts = counts_from_json(js.at("topic_word_counts"));
    s.topic_totals = s.topic_word_counts.rowwise().sum();
    s.refresh_theta();
    cp.fit.completed = js.at("completed").get<bool>();

    const auto& jr = j.at("report");
    auto& r = cp.fit.report;
    for (const auto& rec : jr.at("trace"))
      r.trace.push_back({rec.at(0).get<std::size_t>(), rec.at(1).get<double>(),
                         rec.size() > 2 ? rec.at(2).get<double>() : 0.0});
    r.retained = jr.at("retained").get<std::size_t>();
    r.eta_sum = matrix_from_json(jr.at("eta_sum"));
    r.mu_sum = vector_from_json(jr.at("mu_sum"));
    for (const auto& m : jr.at("sigma_samples")) r.sigma_samples.push_back(matrix_from_json(m));
    cp.vocab_terms = j.at("vocab").get<std::vector<std::string>>();
    if (s.mu.size() != h.k || s.eta.cols() != h.k ||
        s.eta.rows() != static_cast<Eigen::Index>(s.z.size()) || s.topic_word_counts.rows() != h.k)
      throw CheckpointError("checkpoint: inconsistent dimensions");
    return cp;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
}

/// Writes atomically: to a temporary sibling, then renamed over `path`.
inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp,
                            bool include_timing = true) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw CheckpointError("cannot write checkpoint '" + tmp.string() + "'");
    out << checkpoint_to_json(cp, include_timing).dump() << '\n';
    if (!out) throw CheckpointError("failed writing checkpoint '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("malformed checkpoint '" + path.string() + "': " + e.what());
  }
  return checkpoint_from_json(j);
}

/// Restores counts and theta for `corpus`, validating the labels.
inline void attach_corpus(Checkpoint& cp, const Corpus& corpus) {
  auto& s = cp.fit.state;
  if (s.z.size() != corpus.num_docs())
    throw CheckpointError("checkpoint has " + std::to_string(s.z.size()) +
                          " documents but corpus has " + std::to_string(corpus.num_docs()));
  for (std::size_t d = 0; d < s.z.size(); ++d) {
    if (s.z[d].size() != corpus.docs[d].size())
      throw CheckpointError("checkpoint document " + std::to_string(d) + " length mismatch");
    for (TopicLabel l : s.z[d])
      if (l < 0 || l >= cp.hyper.k) throw CheckpointError("checkpoint label out of range");
  }
  const CountMatrix stored = s.topic_word_counts;
  s.tally(corpus, cp.hyper.k);
  if (stored.size() != 0 && stored != s.topic_word_counts)
    throw CheckpointError("checkpoint counts do not match the supplied corpus");
  s.refresh_theta();
}

}  // namespace pnctm
