#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "myotext/errors.hpp"
#include "myotext/keymap.hpp"

namespace myotext {

/// Prefix tree over a-z words.
class Trie {
 public:
  static constexpr std::uint32_t kNone = 0;

  Trie() : nodes_(1) {}

  void insert(std::string_view word) {
    std::uint32_t node = 0;
    for (char c : word) {
      const int slot = c - 'a';
      if (nodes_[node].child[slot] == kNone) {
        nodes_[node].child[slot] = static_cast<std::uint32_t>(nodes_.size());
        nodes_.emplace_back();
      }
      node = nodes_[node].child[slot];
    }
    nodes_[node].terminal = true;
  }

  bool contains(std::string_view word) const {
    std::uint32_t node = 0;
    for (char c : word) {
      if (c < 'a' || c > 'z') return false;
      node = nodes_[node].child[c - 'a'];
      if (node == kNone) return false;
    }
    return nodes_[node].terminal;
  }

  /// Calls visit(word) for every stored word w with |w| == pools.size() and
  /// w[i] in pools[i], in lexicographic order. Only branches whose letter is
  /// allowed at that depth are entered.
  template <class Visit>
  void match(std::span<const LetterPool> pools, Visit&& visit) const {
    std::string prefix;
    prefix.reserve(pools.size());
    match_from(0, pools, prefix, visit);
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::array<std::uint32_t, 26> child{};
    bool terminal = false;
  };

  template <class Visit>
  void match_from(std::uint32_t node, std::span<const LetterPool> pools, std::string& prefix,
                  Visit& visit) const {
    const std::size_t depth = prefix.size();
    if (depth == pools.size()) {
      if (nodes_[node].terminal) visit(std::string_view(prefix));
      return;
    }
    for (char c : pools[depth].letters) {
      const std::uint32_t next = nodes_[node].child[c - 'a'];
      if (next == kNone) continue;
      prefix.push_back(c);
      match_from(next, pools, prefix, visit);
      prefix.pop_back();
    }
  }

  std::vector<Node> nodes_;
};

/// Per-position letter unigram counts over the lexicon, add-one smoothed.
class LetterModel {
 public:
  static constexpr std::size_t kPositions = 24;

  LetterModel() { for (auto& row : counts_) row.fill(0); }

  void add(std::string_view word) {
    for (std::size_t i = 0; i < word.size(); ++i) ++counts_[slot(i)][word[i] - 'a'];
  }

  /// log P(c | position, c in pool): smoothed counts renormalized inside the pool.
  double log_prob(std::size_t position, char c, const LetterPool& pool) const {
    const auto& row = counts_[slot(position)];
    double total = 0.0;
    for (char p : pool.letters) total += static_cast<double>(row[p - 'a']) + 1.0;
    return std::log((static_cast<double>(row[c - 'a']) + 1.0) / total);
  }

  /// Sum of per-position log-probabilities, accumulated left to right.
  double log_prob(std::string_view s, std::span<const LetterPool> pools) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) sum += log_prob(i, s[i], pools[i]);
    return sum;
  }

 private:
  static std::size_t slot(std::size_t position) { return std::min(position, kPositions - 1); }

  std::array<std::array<std::uint64_t, 26>, kPositions> counts_{};
};

inline bool is_lower_word(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

class Lexicon {
 public:
  Lexicon() = default;

  /// Words must already be lowercase a-z; duplicates are ignored.
  static Lexicon from_words(std::vector<std::string> words,
                            std::unordered_map<std::string, std::uint64_t> freq = {}) {
    Lexicon lex;
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    for (const auto& w : words) {
      if (!is_lower_word(w)) throw DataError("lexicon word '" + w + "' is not lowercase a-z");
      lex.trie_.insert(w);
      lex.letters_.add(w);
    }
    lex.words_ = std::move(words);
    for (auto& [w, n] : freq) {
      if (n > 0 && lex.trie_.contains(w)) lex.freq_.emplace(w, n);
    }
    return lex;
  }

  bool contains(std::string_view w) const { return trie_.contains(w); }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::vector<std::string>& words() const { return words_; }
  const Trie& trie() const { return trie_; }
  const LetterModel& letter_model() const { return letters_; }

  std::uint64_t frequency(std::string_view w) const {
    const auto it = freq_.find(std::string(w));
    return it == freq_.end() ? 0 : it->second;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint64_t> freq_;
  Trie trie_;
  LetterModel letters_;
};

struct LexiconLoad {
  Lexicon lexicon;
  std::size_t dropped = 0;  // lines with characters outside a-z after lowercasing
};

/// Whitespace-tokenized, lowercased token counts.
inline std::unordered_map<std::string, std::uint64_t> count_tokens(std::istream& corpus) {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::string tok;
  while (corpus >> tok) ++counts[fold_case(tok)];
  return counts;
}

inline LexiconLoad load_lexicon(std::istream& wordlist, std::istream* frequency_corpus = nullptr) {
  std::vector<std::string> words;
  std::size_t dropped = 0;
  std::string line;
  while (std::getline(wordlist, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string w = fold_case(line);
    if (!is_lower_word(w)) {
      ++dropped;
      continue;
    }
    words.push_back(std::move(w));
  }
  if (words.empty()) throw ConfigError("lexicon is empty");
  std::unordered_map<std::string, std::uint64_t> freq;
  if (frequency_corpus != nullptr) freq = count_tokens(*frequency_corpus);
  return {Lexicon::from_words(std::move(words), std::move(freq)), dropped};
}

inline LexiconLoad load_lexicon(const std::filesystem::path& wordlist,
                                const std::optional<std::filesystem::path>& frequency_corpus = {}) {
  std::ifstream in(wordlist);
  if (!in) throw IoError("cannot read wordlist " + wordlist.string());
  if (!frequency_corpus) return load_lexicon(in);
  std::ifstream freq(*frequency_corpus);
  if (!freq) throw IoError("cannot read frequency corpus " + frequency_corpus->string());
  return load_lexicon(in, &freq);
}

enum class CandidateSource { kLexicon, kFallback, kPlaceholder };

inline std::string_view to_string(CandidateSource s) {
  switch (s) {
    case CandidateSource::kLexicon: return "lexicon";
    case CandidateSource::kFallback: return "fallback";
    case CandidateSource::kPlaceholder: return "placeholder";
  }
  return "?";
}

inline CandidateSource parse_candidate_source(std::string_view s) {
  if (s == "lexicon") return CandidateSource::kLexicon;
  if (s == "fallback") return CandidateSource::kFallback;
  if (s == "placeholder") return CandidateSource::kPlaceholder;
  throw DataError("unknown candidate source '" + std::string(s) + "'");
}

struct Candidate {
  std::string word;
  CandidateSource source = CandidateSource::kLexicon;
  double prior = 0.0;

  bool operator==(const Candidate&) const = default;
};

/// Candidate words for one typed word. An empty candidate list is the
/// EmptyPool outcome and must be resolved before decoding.
struct CandidatePool {
  std::size_t position = 0;
  FingerEvents fingers;
  std::vector<LetterPool> pools;
  std::vector<Candidate> candidates;

  bool empty() const { return candidates.empty(); }
};

struct CandidateConfig {
  std::size_t max_word_len = 24;
  std::size_t fallback_k = 0;
  double fallback_penalty = 5.0;  // nats subtracted from fallback priors
};

struct ScoredString {
  std::string text;
  double log_prob = 0.0;

  bool operator==(const ScoredString&) const = default;
};

/// Top-k strings of the pool product by letter-model probability, skipping
/// those for which exclude() is true. Ties break lexicographically.
///
/// Enumeration is best-first over index vectors, so only O(k * |pools|)
/// strings are touched instead of the whole product.
inline std::vector<ScoredString> fallback_candidates(
    std::span<const LetterPool> pools, std::size_t k, const LetterModel& model,
    const std::function<bool(std::string_view)>& exclude = {}) {
  std::vector<ScoredString> out;
  if (k == 0 || pools.empty()) return out;

  // Per position, letters ordered by (log-prob desc, letter asc).
  std::vector<std::vector<std::pair<double, char>>> ranked(pools.size());
  for (std::size_t i = 0; i < pools.size(); ++i) {
    if (pools[i].letters.empty()) return out;
    for (char c : pools[i].letters) ranked[i].emplace_back(model.log_prob(i, c, pools[i]), c);
    std::sort(ranked[i].begin(), ranked[i].end(),
              [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
  }

  struct State {
    double score;
    std::string text;
    std::vector<std::uint8_t> idx;
  };
  auto worse = [](const State& a, const State& b) {
    return a.score != b.score ? a.score < b.score : a.text > b.text;
  };
  auto make = [&](std::vector<std::uint8_t> idx) {
    State s{0.0, std::string(idx.size(), ' '), std::move(idx)};
    for (std::size_t i = 0; i < s.idx.size(); ++i) {
      s.text[i] = ranked[i][s.idx[i]].second;
    }
    // Same accumulation order as LetterModel::log_prob(string, pools).
    s.score = model.log_prob(s.text, pools);
    return s;
  };

  std::priority_queue<State, std::vector<State>, decltype(worse)> heap(worse);
  std::unordered_set<std::string> seen;
  State first = make(std::vector<std::uint8_t>(pools.size(), 0));
  seen.insert(first.text);
  heap.push(std::move(first));
  while (!heap.empty() && out.size() < k) {
    State top = heap.top();
    heap.pop();
    if (!exclude || !exclude(top.text)) out.push_back({top.text, top.score});
    for (std::size_t i = 0; i < top.idx.size(); ++i) {
      if (top.idx[i] + 1u >= ranked[i].size()) continue;
      auto idx = top.idx;
      ++idx[i];
      State next = make(std::move(idx));
      if (seen.insert(next.text).second) heap.push(std::move(next));
    }
  }
  return out;
}

inline void sort_candidates(std::vector<Candidate>& cands) {
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.prior != b.prior ? a.prior > b.prior : a.word < b.word;
  });
}

inline CandidatePool candidate_words(std::span<const FingerId> fingers, const KeyMap& km,
                                     PoolMode mode, const Lexicon& lex,
                                     const CandidateConfig& cfg = {}) {
  if (fingers.empty() || fingers.size() > cfg.max_word_len) {
    throw DomainError("word length " + std::to_string(fingers.size()) + " outside [1, " +
                      std::to_string(cfg.max_word_len) + "]");
  }
  CandidatePool pool;
  pool.fingers.assign(fingers.begin(), fingers.end());
  for (FingerId f : fingers) {
    pool.pools.push_back(letter_pool(km, f, mode));
    if (pool.pools.back().letters.empty()) {
      throw DomainError("empty letter pool for finger " + std::to_string(f.value()));
    }
  }
  lex.trie().match(pool.pools, [&](std::string_view w) {
    pool.candidates.push_back(
        {std::string(w), CandidateSource::kLexicon, std::log(static_cast<double>(lex.frequency(w)) + 1.0)});
  });
  if (cfg.fallback_k > 0) {
    auto extra = fallback_candidates(pool.pools, cfg.fallback_k, lex.letter_model(),
                                     [&](std::string_view s) { return lex.contains(s); });
    for (auto& s : extra) {
      pool.candidates.push_back({std::move(s.text), CandidateSource::kFallback,
                                 s.log_prob - cfg.fallback_penalty});
    }
  }
  sort_candidates(pool.candidates);
  return pool;
}

/// Whether every candidate has one letter per pool, each drawn from its pool.
inline bool matches_pools(std::string_view word, std::span<const LetterPool> pools) {
  if (word.size() != pools.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (!pools[i].contains(word[i])) return false;
  }
  return true;
}

// JSON pool report: {fingers, pools, candidates:[{word, source, score}]}.

inline nlohmann::json to_json(const CandidatePool& pool) {
  nlohmann::json fingers = nlohmann::json::array();
  for (FingerId f : pool.fingers) fingers.push_back(f.value());
  nlohmann::json pools = nlohmann::json::array();
  for (const auto& p : pool.pools) pools.push_back(p.letters);
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : pool.candidates) {
    cands.push_back({{"word", c.word}, {"source", to_string(c.source)}, {"score", c.prior}});
  }
  return {{"fingers", std::move(fingers)}, {"pools", std::move(pools)}, {"candidates", std::move(cands)}};
}

inline CandidatePool candidate_pool_from_json(const nlohmann::json& j) {
  CandidatePool pool;
  for (const auto& f : j.at("fingers")) pool.fingers.push_back(FingerId{f.get<int>()});
  if (j.contains("pools")) {
    std::size_t i = 0;
    for (const auto& p : j.at("pools")) {
      const FingerId f = i < pool.fingers.size() ? pool.fingers[i] : FingerId{};
      pool.pools.push_back({f, p.get<std::string>(), PoolMode::kCanonical});
      ++i;
    }
  }
  for (const auto& c : j.at("candidates")) {
    Candidate cand;
    cand.word = c.at("word").get<std::string>();
    cand.source = parse_candidate_source(c.value("source", std::string("lexicon")));
    cand.prior = c.value("score", 0.0);
    pool.candidates.push_back(std::move(cand));
  }
  return pool;
}

}  // namespace myotext
