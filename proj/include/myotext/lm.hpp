#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "myotext/errors.hpp"

namespace myotext {

enum class Smoothing { kStupidBackoff, kAddK, kArpa };

inline std::string_view to_string(Smoothing s) {
  switch (s) {
    case Smoothing::kStupidBackoff: return "stupid_backoff";
    case Smoothing::kAddK: return "add_k";
    case Smoothing::kArpa: return "arpa";
  }
  return "?";
}

inline Smoothing parse_smoothing(std::string_view s) {
  if (s == "stupid_backoff") return Smoothing::kStupidBackoff;
  if (s == "add_k") return Smoothing::kAddK;
  throw ConfigError("unknown smoothing '" + std::string(s) + "' (stupid_backoff|add_k)");
}

struct SmoothingConfig {
  Smoothing kind = Smoothing::kStupidBackoff;
  double alpha = 0.4;  // stupid backoff discount per level
  double k = 0.1;      // add-k pseudo count
};

/// Word-level n-gram model over sentence-bounded token streams
/// `<s> w1 ... wn </s>`.
///
/// The prediction vocabulary V is every training word plus `</s>` and
/// `<unk>`; `<s>` only ever appears as context. Scores are natural logs.
///
///  - stupid_backoff: log c(h w)/c(h) when the n-gram was seen, otherwise
///    log(alpha) plus the score under the shortened context. Unigrams are
///    add-one smoothed over V so every query is finite. This is a ranking
///    score, not a normalized probability.
///  - add_k: (c(h w) + k) / (c(h) + k|V|) using the longest suffix h of the
///    context that was seen as a context, down to the unigram level. Each
///    such distribution sums to one over V.
///  - arpa: standard backoff evaluation of imported ARPA tables.
class NGramModel {
 public:
  static constexpr std::string_view kUnk = "<unk>";
  static constexpr std::string_view kBos = "<s>";
  static constexpr std::string_view kEos = "</s>";
  static constexpr std::uint32_t kUnkId = 0;
  static constexpr std::uint32_t kBosId = 1;
  static constexpr std::uint32_t kEosId = 2;

  NGramModel() = default;

  int order() const { return order_; }
  const SmoothingConfig& smoothing() const { return smoothing_; }

  /// Size of the prediction vocabulary (words, `</s>`, `<unk>`).
  std::size_t vocab_size() const { return words_.size() - 1; }

  /// Prediction vocabulary in id order.
  std::vector<std::string> prediction_vocab() const {
    std::vector<std::string> out;
    for (std::uint32_t i = 0; i < words_.size(); ++i) {
      if (i != kBosId) out.push_back(words_[i]);
    }
    return out;
  }

  std::uint32_t id(std::string_view w) const {
    const auto it = ids_.find(std::string(w));
    return it == ids_.end() ? kUnkId : it->second;
  }

  const std::string& word(std::uint32_t id) const { return words_.at(id); }

  /// log P(word | context); only the last order-1 context words matter.
  double logprob(std::string_view w, std::span<const std::string> context) const {
    std::vector<std::uint32_t> ctx;
    const std::size_t take = std::min<std::size_t>(context.size(), order_ - 1);
    for (std::size_t i = context.size() - take; i < context.size(); ++i) ctx.push_back(id(context[i]));
    return logprob_ids(id(w), ctx);
  }

  double logprob(std::string_view w, std::initializer_list<std::string> context) const {
    std::vector<std::string> c(context);
    return logprob(w, std::span<const std::string>(c));
  }

  double logprob_ids(std::uint32_t w, std::span<const std::uint32_t> ctx) const {
    if (ctx.size() > static_cast<std::size_t>(order_ - 1)) ctx = ctx.last(order_ - 1);
    switch (smoothing_.kind) {
      case Smoothing::kStupidBackoff: return stupid_backoff(w, ctx);
      case Smoothing::kAddK: return add_k(w, ctx);
      case Smoothing::kArpa: return arpa(w, ctx);
    }
    return 0.0;
  }

  /// Count of an n-gram given as words (1 <= n <= order); 0 for arpa models.
  std::uint64_t count(std::span<const std::string> ngram) const {
    if (ngram.empty() || ngram.size() > counts_.size()) return 0;
    std::vector<std::uint32_t> ids;
    for (const auto& w : ngram) ids.push_back(id(w));
    return lookup(counts_[ngram.size() - 1], key(ids));
  }

  /// Sum of all counts at level n.
  std::uint64_t total_count(int n) const {
    std::uint64_t sum = 0;
    for (const auto& [k, c] : counts_.at(n - 1)) sum += c;
    return sum;
  }

  /// Number of distinct n-grams at level n.
  std::size_t distinct(int n) const {
    return smoothing_.kind == Smoothing::kArpa ? arpa_.at(n - 1).size() : counts_.at(n - 1).size();
  }

  friend NGramModel train_ngram(const std::vector<std::vector<std::string>>& sentences, int order,
                                const SmoothingConfig& smoothing);
  friend void write_arpa(std::ostream& os, const NGramModel& model);
  friend NGramModel read_arpa(std::istream& is);

 private:
  struct ArpaEntry {
    double log10_prob = 0.0;
    double log10_bow = 0.0;
    bool has_bow = false;
  };
  using Key = std::string;  // packed 32-bit ids

  static Key key(std::span<const std::uint32_t> ids) {
    Key k(ids.size() * sizeof(std::uint32_t), '\0');
    std::memcpy(k.data(), ids.data(), k.size());
    return k;
  }
  static Key key_with(std::span<const std::uint32_t> ctx, std::uint32_t w) {
    Key k(ctx.size() * sizeof(std::uint32_t) + sizeof(std::uint32_t), '\0');
    if (!ctx.empty()) std::memcpy(k.data(), ctx.data(), ctx.size() * sizeof(std::uint32_t));
    std::memcpy(k.data() + ctx.size() * sizeof(std::uint32_t), &w, sizeof w);
    return k;
  }
  static std::vector<std::uint32_t> unkey(const Key& k) {
    std::vector<std::uint32_t> ids(k.size() / sizeof(std::uint32_t));
    std::memcpy(ids.data(), k.data(), k.size());
    return ids;
  }
  static std::uint64_t lookup(const std::unordered_map<Key, std::uint64_t>& m, const Key& k) {
    const auto it = m.find(k);
    return it == m.end() ? 0 : it->second;
  }

  std::uint64_t context_count(std::span<const std::uint32_t> ctx) const {
    if (ctx.empty()) return total_tokens_;
    return lookup(context_counts_[ctx.size() - 1], key(ctx));
  }

  double unigram_add(std::uint32_t w, double k) const {
    const double c = static_cast<double>(lookup(counts_[0], key_with({}, w)));
    return std::log((c + k) / (static_cast<double>(total_tokens_) + k * vocab_size()));
  }

  double stupid_backoff(std::uint32_t w, std::span<const std::uint32_t> ctx) const {
    double penalty = 0.0;
    const double log_alpha = std::log(smoothing_.alpha);
    for (;;) {
      if (ctx.empty()) return penalty + unigram_add(w, 1.0);
      const std::uint64_t c = lookup(counts_[ctx.size()], key_with(ctx, w));
      if (c > 0) {
        return penalty + std::log(static_cast<double>(c) / static_cast<double>(context_count(ctx)));
      }
      penalty += log_alpha;
      ctx = ctx.subspan(1);
    }
  }

  double add_k(std::uint32_t w, std::span<const std::uint32_t> ctx) const {
    while (!ctx.empty() && context_count(ctx) == 0) ctx = ctx.subspan(1);
    if (ctx.empty()) return unigram_add(w, smoothing_.k);
    const double c = static_cast<double>(lookup(counts_[ctx.size()], key_with(ctx, w)));
    const double h = static_cast<double>(context_count(ctx));
    return std::log((c + smoothing_.k) / (h + smoothing_.k * vocab_size()));
  }

  double arpa(std::uint32_t w, std::span<const std::uint32_t> ctx) const {
    double bow = 0.0;
    for (;;) {
      const auto& table = arpa_[ctx.size()];
      const auto it = table.find(key_with(ctx, w));
      if (it != table.end()) return (bow + it->second.log10_prob) * std::numbers::ln10;
      if (ctx.empty()) {
        const auto unk = arpa_[0].find(key_with({}, kUnkId));
        const double p = unk != arpa_[0].end() ? unk->second.log10_prob : kArpaFloor;
        return (bow + p) * std::numbers::ln10;
      }
      const auto h = arpa_[ctx.size() - 1].find(key(ctx));
      if (h != arpa_[ctx.size() - 1].end()) bow += h->second.log10_bow;
      ctx = ctx.subspan(1);
    }
  }

  void init_vocab(std::vector<std::string> words) {
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    words_ = {std::string(kUnk), std::string(kBos), std::string(kEos)};
    for (auto& w : words) {
      if (w == kUnk || w == kBos || w == kEos) continue;
      words_.push_back(std::move(w));
    }
    ids_.clear();
    for (std::uint32_t i = 0; i < words_.size(); ++i) ids_.emplace(words_[i], i);
  }

  static constexpr double kArpaFloor = -99.0;

  int order_ = 1;
  SmoothingConfig smoothing_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::uint64_t total_tokens_ = 0;
  std::vector<std::unordered_map<Key, std::uint64_t>> counts_;          // level n at [n-1]
  std::vector<std::unordered_map<Key, std::uint64_t>> context_counts_;  // contexts of length n at [n-1]
  std::vector<std::unordered_map<Key, ArpaEntry>> arpa_;               // level n at [n-1]
};

inline NGramModel train_ngram(const std::vector<std::vector<std::string>>& sentences, int order,
                              const SmoothingConfig& smoothing = {}) {
  if (order < 1) throw ConfigError("n-gram order must be >= 1");
  if (smoothing.kind == Smoothing::kArpa) throw ConfigError("cannot train an arpa model");
  if (smoothing.kind == Smoothing::kStupidBackoff && !(smoothing.alpha > 0.0)) {
    throw ConfigError("stupid backoff alpha must be positive");
  }
  if (smoothing.kind == Smoothing::kAddK && !(smoothing.k >= 0.0)) {
    throw ConfigError("add-k pseudo count must be non-negative");
  }
  std::size_t tokens = 0;
  std::vector<std::string> words;
  for (const auto& s : sentences) {
    tokens += s.size();
    words.insert(words.end(), s.begin(), s.end());
  }
  if (tokens == 0) throw ConfigError("training corpus is empty");

  NGramModel m;
  m.order_ = order;
  m.smoothing_ = smoothing;
  m.init_vocab(std::move(words));
  m.counts_.assign(order, {});
  m.context_counts_.assign(order > 1 ? order - 1 : 0, {});

  std::vector<std::uint32_t> stream;
  for (const auto& s : sentences) {
    if (s.empty()) continue;
    stream.assign(1, NGramModel::kBosId);
    for (const auto& w : s) stream.push_back(m.id(w));
    stream.push_back(NGramModel::kEosId);
    for (std::size_t j = 1; j < stream.size(); ++j) {
      ++m.total_tokens_;
      for (int n = 1; n <= order && static_cast<std::size_t>(n) <= j + 1; ++n) {
        const std::span<const std::uint32_t> gram(stream.data() + j + 1 - n, n);
        ++m.counts_[n - 1][NGramModel::key(gram)];
        if (n > 1) ++m.context_counts_[n - 2][NGramModel::key(gram.first(n - 1))];
      }
    }
  }
  return m;
}

/// Splits on single spaces; empty lines are skipped.
inline std::vector<std::vector<std::string>> read_sentences(std::istream& is) {
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> toks;
    std::istringstream ss(line);
    std::string t;
    while (ss >> t) toks.push_back(std::move(t));
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

inline NGramModel train_ngram_file(const std::filesystem::path& corpus, int order,
                                   const SmoothingConfig& smoothing = {}) {
  std::ifstream in(corpus);
  if (!in) throw IoError("cannot read corpus " + corpus.string());
  return train_ngram(read_sentences(in), order, smoothing);
}

namespace detail {

inline std::string format_log10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.8f", v);
  return buf;
}

}  // namespace detail

/// ARPA text with base-10 log values. Trained models list every seen n-gram
/// with its model score; backoff weights are log10(alpha) for stupid backoff
/// and the mass-preserving weight for add-k. Output order is fixed, so a
/// model exports to the same bytes every time.
inline void write_arpa(std::ostream& os, const NGramModel& m) {
  using Entry = NGramModel::ArpaEntry;
  std::vector<std::vector<std::pair<std::vector<std::uint32_t>, Entry>>> levels(m.order_);

  if (m.smoothing_.kind == Smoothing::kArpa) {
    for (int n = 1; n <= m.order_; ++n) {
      for (const auto& [k, e] : m.arpa_[n - 1]) levels[n - 1].emplace_back(NGramModel::unkey(k), e);
    }
  } else {
    const bool add_k = m.smoothing_.kind == Smoothing::kAddK;
    const double log10_alpha = std::log10(m.smoothing_.alpha);
    auto score10 = [&](const std::vector<std::uint32_t>& gram) {
      std::span<const std::uint32_t> g(gram);
      return m.logprob_ids(g.back(), g.first(g.size() - 1)) / std::numbers::ln10;
    };
    // Entries for every vocabulary word at level 1, seen n-grams above.
    for (std::uint32_t w = 0; w < m.words_.size(); ++w) {
      Entry e;
      e.log10_prob = w == NGramModel::kBosId ? NGramModel::kArpaFloor : score10({w});
      levels[0].emplace_back(std::vector<std::uint32_t>{w}, e);
    }
    for (int n = 2; n <= m.order_; ++n) {
      for (const auto& [k, c] : m.counts_[n - 1]) {
        auto gram = NGramModel::unkey(k);
        Entry e;
        e.log10_prob = score10(gram);
        levels[n - 1].emplace_back(std::move(gram), e);
      }
    }
    // Backoff weights on every listed n-gram that is a seen context.
    for (int n = 1; n < m.order_; ++n) {
      // Mass of the seen continuations of each context, under the full
      // context and under the context minus its first word.
      std::unordered_map<NGramModel::Key, std::pair<double, double>> seen_mass;
      if (add_k) {
        for (const auto& [k, c] : m.counts_[n]) {
          const auto gram = NGramModel::unkey(k);
          const std::span<const std::uint32_t> g(gram);
          const auto ctx = g.first(n);
          auto& [high, low] = seen_mass[NGramModel::key(ctx)];
          high += std::exp(m.logprob_ids(g.back(), ctx));
          low += std::exp(m.logprob_ids(g.back(), ctx.subspan(1)));
        }
      }
      for (auto& [gram, e] : levels[n - 1]) {
        if (m.context_count(gram) == 0) continue;
        e.has_bow = true;
        if (!add_k) {
          e.log10_bow = log10_alpha;
          continue;
        }
        const auto [high, low] = seen_mass[NGramModel::key(gram)];
        const double num = 1.0 - high, den = 1.0 - low;
        e.log10_bow = (num > 1e-15 && den > 1e-15) ? std::log10(num / den) : NGramModel::kArpaFloor;
      }
    }
  }

  auto as_words = [&](const std::vector<std::uint32_t>& g) {
    std::vector<std::string_view> out;
    for (auto id : g) out.push_back(m.words_[id]);
    return out;
  };
  for (auto& level : levels) {
    std::sort(level.begin(), level.end(),
              [&](const auto& a, const auto& b) { return as_words(a.first) < as_words(b.first); });
  }

  os << "\\data\\\n";
  for (int n = 1; n <= m.order_; ++n) os << "ngram " << n << "=" << levels[n - 1].size() << "\n";
  for (int n = 1; n <= m.order_; ++n) {
    os << "\n\\" << n << "-grams:\n";
    for (const auto& [gram, e] : levels[n - 1]) {
      os << detail::format_log10(e.log10_prob) << '\t';
      for (std::size_t i = 0; i < gram.size(); ++i) os << (i ? " " : "") << m.words_[gram[i]];
      if (e.has_bow) os << '\t' << detail::format_log10(e.log10_bow);
      os << '\n';
    }
  }
  os << "\n\\end\\\n";
}

inline NGramModel read_arpa(std::istream& is) {
  NGramModel m;
  m.smoothing_.kind = Smoothing::kArpa;
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> bool {
    while (std::getline(is, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };

  if (!next() || line != "\\data\\") throw ParseError(lineno, "expected \\data\\ header");
  std::vector<std::size_t> declared;
  while (next() && line.rfind("ngram ", 0) == 0) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "malformed ngram count line");
    int n = 0;
    long long c = -1;
    try {
      n = std::stoi(line.substr(6, eq - 6));
      c = std::stoll(line.substr(eq + 1));
    } catch (const std::exception&) {
      throw ParseError(lineno, "malformed ngram count line");
    }
    if (n != static_cast<int>(declared.size()) + 1 || c < 0) {
      throw ParseError(lineno, "ngram counts must be listed for orders 1..N");
    }
    declared.push_back(static_cast<std::size_t>(c));
  }
  if (declared.empty()) throw ParseError(lineno, "no ngram counts in \\data\\ section");
  m.order_ = static_cast<int>(declared.size());
  m.arpa_.assign(m.order_, {});

  // Section bodies are buffered until the unigram vocabulary is known.
  std::vector<std::vector<std::pair<std::size_t, std::string>>> bodies(m.order_);
  bool ended = false;
  int current = 0;
  do {
    if (line == "\\end\\") {
      ended = true;
      break;
    }
    if (line.front() == '\\') {
      int n = 0;
      if (std::sscanf(line.c_str(), "\\%d-grams:", &n) != 1 || line != "\\" + std::to_string(n) + "-grams:") {
        throw ParseError(lineno, "malformed section header '" + line + "'");
      }
      if (n != current + 1 || n > m.order_) throw ParseError(lineno, "unexpected section '" + line + "'");
      current = n;
      continue;
    }
    if (current == 0) throw ParseError(lineno, "entry outside an n-gram section");
    bodies[current - 1].emplace_back(lineno, line);
  } while (next());
  if (!ended) throw ParseError(lineno, "missing \\end\\ marker (truncated file?)");
  if (current != m.order_) throw ParseError(lineno, "missing n-gram sections");

  struct Parsed {
    double prob = 0.0;
    std::vector<std::string> words;
    bool has_bow = false;
    double bow = 0.0;
  };
  auto parse_entry = [&](std::size_t ln, const std::string& text, int n) {
    std::istringstream ss(text);
    Parsed p;
    std::string tok;
    if (!(ss >> tok)) throw ParseError(ln, "empty entry");
    try {
      p.prob = std::stod(tok);
    } catch (const std::exception&) {
      throw ParseError(ln, "bad probability '" + tok + "'");
    }
    for (int i = 0; i < n; ++i) {
      if (!(ss >> tok)) throw ParseError(ln, "expected " + std::to_string(n) + " words");
      p.words.push_back(tok);
    }
    if (ss >> tok) {
      try {
        p.bow = std::stod(tok);
      } catch (const std::exception&) {
        throw ParseError(ln, "bad backoff weight '" + tok + "'");
      }
      p.has_bow = true;
    }
    if (ss >> tok) throw ParseError(ln, "trailing data");
    return p;
  };

  std::vector<std::vector<std::pair<std::size_t, Parsed>>> parsed(m.order_);
  std::vector<std::string> vocab;
  for (int n = 1; n <= m.order_; ++n) {
    if (bodies[n - 1].size() != declared[n - 1]) {
      throw ParseError(lineno, std::to_string(n) + "-gram count " + std::to_string(bodies[n - 1].size()) +
                                   " differs from declared " + std::to_string(declared[n - 1]));
    }
    for (const auto& [ln, text] : bodies[n - 1]) {
      parsed[n - 1].emplace_back(ln, parse_entry(ln, text, n));
      if (n == 1) vocab.push_back(parsed[0].back().second.words[0]);
    }
  }
  m.init_vocab(vocab);
  for (int n = 1; n <= m.order_; ++n) {
    for (const auto& [ln, p] : parsed[n - 1]) {
      std::vector<std::uint32_t> ids;
      for (const auto& w : p.words) {
        const std::uint32_t id = m.id(w);
        if (id == NGramModel::kUnkId && w != NGramModel::kUnk) {
          throw ParseError(ln, "word '" + w + "' missing from unigrams");
        }
        ids.push_back(id);
      }
      m.arpa_[n - 1][NGramModel::key(ids)] = {p.prob, p.bow, p.has_bow};
    }
  }
  return m;
}

inline NGramModel read_arpa_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read language model " + path.string());
  return read_arpa(in);
}

}  // namespace myotext
