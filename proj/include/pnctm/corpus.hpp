#pragma once

// Document ingestion: plain text (one document per file or per line) and
// the UCI bag-of-words format, vocabulary pruning, and the matching writers.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pnctm {

using TermId = int;

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unique terms with their exact inverse map and frequency statistics.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Throws on duplicate terms.
  explicit Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
    term_to_id_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (!term_to_id_.emplace(terms_[i], static_cast<TermId>(i)).second)
        throw CorpusError("duplicate vocabulary term '" + terms_[i] + "'");
    }
    doc_freq_.assign(terms_.size(), 0);
    corpus_freq_.assign(terms_.size(), 0);
  }

  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::string& term(TermId id) const { return terms_.at(static_cast<std::size_t>(id)); }

  std::optional<TermId> find(const std::string& term) const {
    auto it = term_to_id_.find(term);
    if (it == term_to_id_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<std::size_t>& doc_freq() const noexcept { return doc_freq_; }
  const std::vector<std::size_t>& corpus_freq() const noexcept { return corpus_freq_; }

  /// Recomputes both frequency tables from tokenized documents.
  void tally(const std::vector<std::vector<TermId>>& docs) {
    doc_freq_.assign(terms_.size(), 0);
    corpus_freq_.assign(terms_.size(), 0);
    std::vector<std::size_t> last_seen(terms_.size(), static_cast<std::size_t>(-1));
    for (std::size_t d = 0; d < docs.size(); ++d) {
      for (TermId t : docs[d]) {
        const auto i = static_cast<std::size_t>(t);
        ++corpus_freq_[i];
        if (last_seen[i] != d) {
          last_seen[i] = d;
          ++doc_freq_[i];
        }
      }
    }
  }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> term_to_id_;
  std::vector<std::size_t> doc_freq_;
  std::vector<std::size_t> corpus_freq_;
};

/// Token-id sequences over a vocabulary of size `vocab_size`.
struct Corpus {
  std::vector<std::vector<TermId>> docs;
  std::vector<std::string> doc_ids;
  std::size_t vocab_size = 0;

  std::size_t num_docs() const noexcept { return docs.size(); }

  std::size_t num_tokens() const noexcept {
    std::size_t n = 0;
    for (const auto& d : docs) n += d.size();
    return n;
  }

  /// Throws unless every token is < vocab_size and no document is empty.
  void validate() const {
    if (docs.size() != doc_ids.size()) throw CorpusError("corpus: doc_ids size mismatch");
    for (std::size_t d = 0; d < docs.size(); ++d) {
      if (docs[d].empty()) throw CorpusError("corpus: empty document " + doc_ids[d]);
      for (TermId t : docs[d])
        if (t < 0 || static_cast<std::size_t>(t) >= vocab_size)
          throw CorpusError("corpus: token id out of range in document " + doc_ids[d]);
    }
  }
};

struct LoadedCorpus {
  Corpus corpus;
  Vocabulary vocab;
};

struct TokenizerConfig {
  bool one_doc_per_line = false;
};

/// Lowercases, deletes punctuation characters and splits on whitespace.
/// "The CAT." -> {"the", "cat"}; "don't" -> {"dont"}.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else if (std::ispunct(c)) {
      continue;
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline LoadedCorpus build_from_tokens(std::vector<std::pair<std::string, std::vector<std::string>>> raw) {
  std::erase_if(raw, [](const auto& doc) { return doc.second.empty(); });
  if (raw.empty()) throw CorpusError("zero retained documents");
  std::set<std::string> unique;
  for (const auto& [id, tokens] : raw) unique.insert(tokens.begin(), tokens.end());
  LoadedCorpus out;
  out.vocab = Vocabulary(std::vector<std::string>(unique.begin(), unique.end()));
  out.corpus.vocab_size = out.vocab.size();
  for (auto& [id, tokens] : raw) {
    std::vector<TermId> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(*out.vocab.find(t));
    out.corpus.docs.push_back(std::move(ids));
    out.corpus.doc_ids.push_back(id);
  }
  out.vocab.tally(out.corpus.docs);
  return out;
}

}  // namespace detail

/// Loads a file or a directory of files (sorted by name). Without
/// one_doc_per_line each file is one document; with it each line is.
/// Term ids follow lexicographic term order.
inline LoadedCorpus load_plain_text(const std::filesystem::path& path,
                                    const TokenizerConfig& config = {}) {
  namespace fs = std::filesystem;
  std::error_code ec;
  std::vector<fs::path> files;
  if (fs::is_directory(path, ec)) {
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path, ec)) {
    files.push_back(path);
  } else {
    throw CorpusError("cannot read '" + path.string() + "'");
  }

  std::vector<std::pair<std::string, std::vector<std::string>>> raw;
  for (const auto& file : files) {
    const std::string text = detail::read_file(file);
    const std::string stem = file.filename().string();
    if (config.one_doc_per_line) {
      std::istringstream lines(text);
      std::string line;
      for (std::size_t n = 1; std::getline(lines, line); ++n)
        raw.emplace_back(stem + ":" + std::to_string(n), tokenize(line));
    } else {
      raw.emplace_back(stem, tokenize(text));
    }
  }
  return detail::build_from_tokens(std::move(raw));
}

inline Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot read vocabulary '" + path.string() + "'");
  std::vector<std::string> terms;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    terms.push_back(line);
  }
  return Vocabulary(std::move(terms));
}

/// UCI bag-of-words: header D, W, NNZ, then NNZ triples "doc term count",
/// 1-indexed. Each triple expands into `count` copies of token term-1;
/// within a document tokens are ordered by ascending term id. Documents
/// without any triple are dropped.
inline LoadedCorpus load_uci_bow(std::istream& docword, Vocabulary vocab) {
  long long num_docs = 0, num_words = 0, nnz = 0;
  if (!(docword >> num_docs >> num_words >> nnz) || num_docs < 0 || num_words <= 0 || nnz < 0)
    throw CorpusError("docword: malformed header");
  if (static_cast<std::size_t>(num_words) != vocab.size())
    throw CorpusError("docword: header W=" + std::to_string(num_words) +
                      " but vocabulary has " + std::to_string(vocab.size()) + " terms");

  std::map<long long, std::map<long long, long long>> counts;
  long long rows = 0, d = 0, t = 0, c = 0;
  while (docword >> d >> t >> c) {
    ++rows;
    if (d < 1 || d > num_docs)
      throw CorpusError("docword: document id " + std::to_string(d) + " out of range");
    if (t < 1 || t > num_words)
      throw CorpusError("docword: term id " + std::to_string(t) + " out of range");
    if (c < 0) throw CorpusError("docword: negative count");
    counts[d][t] += c;
  }
  if (!docword.eof()) throw CorpusError("docword: malformed row " + std::to_string(rows + 1));
  if (rows != nnz)
    throw CorpusError("docword: header NNZ=" + std::to_string(nnz) + " but " +
                      std::to_string(rows) + " rows present");

  LoadedCorpus out;
  out.vocab = std::move(vocab);
  out.corpus.vocab_size = out.vocab.size();
  for (const auto& [doc, terms] : counts) {
    std::vector<TermId> tokens;
    for (const auto& [term, count] : terms)
      tokens.insert(tokens.end(), static_cast<std::size_t>(count), static_cast<TermId>(term - 1));
    if (tokens.empty()) continue;
    out.corpus.docs.push_back(std::move(tokens));
    out.corpus.doc_ids.push_back(std::to_string(doc));
  }
  if (out.corpus.docs.empty()) throw CorpusError("zero retained documents");
  out.vocab.tally(out.corpus.docs);
  return out;
}

inline LoadedCorpus load_uci_bow(const std::filesystem::path& docword_path,
                                 const std::filesystem::path& vocab_path) {
  Vocabulary vocab = load_vocabulary(vocab_path);
  std::ifstream in(docword_path);
  if (!in) throw CorpusError("cannot read docword '" + docword_path.string() + "'");
  return load_uci_bow(in, std::move(vocab));
}

inline void write_uci_bow(std::ostream& out, const Corpus& corpus) {
  std::vector<std::map<TermId, std::size_t>> counts(corpus.docs.size());
  std::size_t nnz = 0;
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    for (TermId t : corpus.docs[d]) ++counts[d][t];
    nnz += counts[d].size();
  }
  out << corpus.docs.size() << '\n' << corpus.vocab_size << '\n' << nnz << '\n';
  for (std::size_t d = 0; d < counts.size(); ++d)
    for (const auto& [t, c] : counts[d]) out << d + 1 << ' ' << t + 1 << ' ' << c << '\n';
}

/// One term per line; line number (0-based) is the term id.
inline void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  for (const auto& t : vocab.terms()) out << t << '\n';
}

struct PruneConfig {
  std::size_t min_doc_freq = 5;
  double max_doc_frac = 0.5;
  std::vector<std::string> stopwords;
};

struct PruneResult {
  LoadedCorpus pruned;
  std::vector<std::string> dropped_docs;
};

/// Removes stopwords, terms in fewer than min_doc_freq documents and terms
/// in more than max_doc_frac of the documents, then drops documents left
/// empty. Dropping documents changes the document fractions, so the
/// filters are reapplied until nothing changes; the result is a fixed
/// point and pruning it again is the identity.
inline PruneResult prune_vocabulary(const Corpus& corpus, const Vocabulary& vocab,
                                    const PruneConfig& config) {
  if (!(config.max_doc_frac >= 0.0 && config.max_doc_frac <= 1.0))
    throw std::invalid_argument("prune_vocabulary: max_doc_frac must be in [0, 1]");
  const std::set<std::string> stop(config.stopwords.begin(), config.stopwords.end());

  std::vector<std::vector<TermId>> docs = corpus.docs;
  std::vector<std::string> ids = corpus.doc_ids;
  std::vector<bool> keep(vocab.size(), true);
  for (std::size_t t = 0; t < vocab.size(); ++t)
    if (stop.count(vocab.terms()[t])) keep[t] = false;

  PruneResult result;
  for (;;) {
    Vocabulary stats(vocab.terms());
    stats.tally(docs);
    bool changed = false;
    const double n_docs = static_cast<double>(docs.size());
    for (std::size_t t = 0; t < vocab.size(); ++t) {
      if (!keep[t]) continue;
      const auto df = stats.doc_freq()[t];
      if (df < config.min_doc_freq || static_cast<double>(df) > config.max_doc_frac * n_docs) {
        keep[t] = false;
        changed = true;
      }
    }
    std::vector<std::vector<TermId>> next_docs;
    std::vector<std::string> next_ids;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      std::vector<TermId> kept;
      for (TermId t : docs[d])
        if (keep[static_cast<std::size_t>(t)]) kept.push_back(t);
      if (kept.size() != docs[d].size()) changed = true;
      if (kept.empty()) {
        result.dropped_docs.push_back(ids[d]);
        continue;
      }
      next_docs.push_back(std::move(kept));
      next_ids.push_back(ids[d]);
    }
    docs = std::move(next_docs);
    ids = std::move(next_ids);
    if (!changed) break;
  }

  std::vector<std::string> terms;
  std::vector<TermId> remap(vocab.size(), -1);
  for (std::size_t t = 0; t < vocab.size(); ++t) {
    if (!keep[t]) continue;
    remap[t] = static_cast<TermId>(terms.size());
    terms.push_back(vocab.terms()[t]);
  }
  if (terms.empty() || docs.empty()) throw CorpusError("pruning removed all terms");
  for (auto& doc : docs)
    for (auto& t : doc) t = remap[static_cast<std::size_t>(t)];

  result.pruned.vocab = Vocabulary(std::move(terms));
  result.pruned.corpus.docs = std::move(docs);
  result.pruned.corpus.doc_ids = std::move(ids);
  result.pruned.corpus.vocab_size = result.pruned.vocab.size();
  result.pruned.vocab.tally(result.pruned.corpus.docs);
  return result;
}

}  // namespace pnctm
