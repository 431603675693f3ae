#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "myotext/errors.hpp"

namespace myotext {

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  bool operator==(const EditCounts&) const = default;
  EditCounts& operator+=(const EditCounts& o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    return *this;
  }
};

/// Minimum unit-cost edit alignment of hyp against ref. Among equally short
/// alignments the backtrace prefers the diagonal (match/substitution), then
/// deletion, then insertion.
template <class T>
EditCounts align(std::span<const T> ref, std::span<const T> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  EditCounts c;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        if (!same) ++c.substitutions;
        --i, --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

inline std::vector<std::string> tokenize_words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream ss{std::string(s)};
  std::string w;
  while (ss >> w) out.push_back(std::move(w));
  return out;
}

inline EditCounts align_words(std::string_view ref, std::string_view hyp) {
  const auto r = tokenize_words(ref), h = tokenize_words(hyp);
  return align<std::string>(r, h);
}

/// Character alignment including spaces.
inline EditCounts align_chars(std::string_view ref, std::string_view hyp) {
  return align<char>(std::span<const char>(ref.data(), ref.size()),
                     std::span<const char>(hyp.data(), hyp.size()));
}

/// Error counts with reference length N. A zero-length reference with a
/// nonempty hypothesis has no defined rate; undefined() flags it.
struct RateCounts {
  EditCounts edits;
  std::size_t ref_length = 0;

  bool undefined() const { return ref_length == 0 && edits.errors() > 0; }
  double rate() const {
    if (ref_length == 0) return edits.errors() == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return static_cast<double>(edits.errors()) / static_cast<double>(ref_length);
  }
};

struct SentenceEval {
  RateCounts word;
  RateCounts chr;
};

inline SentenceEval evaluate_sentence(std::string_view ref, std::string_view hyp) {
  SentenceEval s;
  s.word.edits = align_words(ref, hyp);
  s.word.ref_length = tokenize_words(ref).size();
  s.chr.edits = align_chars(ref, hyp);
  s.chr.ref_length = ref.size();
  return s;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 when n < 2
};

inline MeanStd mean_std(std::span<const double> xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return r;
}

/// Corpus report. The micro rate (summed errors over summed reference
/// length) is the headline figure; the per-sentence mean and spread are
/// reported next to it.
struct EvalReport {
  std::vector<SentenceEval> sentences;
  RateCounts word;
  RateCounts chr;
  MeanStd wer_per_sentence;
  MeanStd cer_per_sentence;
  std::size_t undefined_sentences = 0;

  double wer() const { return word.rate(); }
  double cer() const { return chr.rate(); }
};

/// Sentence alignments run on up to `workers` threads; aggregation is in
/// input order, so the report does not depend on the worker count.
inline EvalReport evaluate(std::span<const std::string> refs, std::span<const std::string> hyps,
                           std::string_view ref_name = "reference",
                           std::string_view hyp_name = "hypothesis", unsigned workers = 1) {
  if (refs.size() != hyps.size()) {
    const bool ref_short = refs.size() < hyps.size();
    throw DataError("sentence count mismatch: " +
                    std::string(ref_short ? ref_name : hyp_name) + " is shorter (" +
                    std::to_string(std::min(refs.size(), hyps.size())) + " vs " +
                    std::to_string(std::max(refs.size(), hyps.size())) + " sentences)");
  }
  std::vector<SentenceEval> per(refs.size());
  workers = std::max(1u, workers);
  if (workers == 1 || refs.size() < 2) {
    for (std::size_t i = 0; i < refs.size(); ++i) per[i] = evaluate_sentence(refs[i], hyps[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < refs.size(); i = next++) per[i] = evaluate_sentence(refs[i], hyps[i]);
      });
    }
    for (auto& t : pool) t.join();
  }
  EvalReport rep;
  std::vector<double> wers, cers;
  for (const SentenceEval& s : per) {
    rep.word.edits += s.word.edits;
    rep.word.ref_length += s.word.ref_length;
    rep.chr.edits += s.chr.edits;
    rep.chr.ref_length += s.chr.ref_length;
    if (s.word.undefined() || s.chr.undefined()) {
      ++rep.undefined_sentences;
    } else {
      wers.push_back(s.word.rate());
      cers.push_back(s.chr.rate());
    }
    rep.sentences.push_back(s);
  }
  rep.wer_per_sentence = mean_std(wers);
  rep.cer_per_sentence = mean_std(cers);
  return rep;
}

namespace detail {

inline nlohmann::json rate_json(const RateCounts& r) {
  nlohmann::json j = {{"S", r.edits.substitutions}, {"D", r.edits.deletions},
                      {"I", r.edits.insertions}, {"N", r.ref_length}};
  if (r.undefined()) {
    j["rate"] = nullptr;
    j["undefined"] = true;
  } else {
    j["rate"] = r.rate();
  }
  return j;
}

}  // namespace detail

inline nlohmann::json to_json(const EvalReport& rep, bool per_sentence = false) {
  nlohmann::json j;
  j["sentences"] = rep.sentences.size();
  j["word"] = detail::rate_json(rep.word);
  j["char"] = detail::rate_json(rep.chr);
  j["wer_micro"] = rep.word.undefined() ? nlohmann::json(nullptr) : nlohmann::json(rep.wer());
  j["cer_micro"] = rep.chr.undefined() ? nlohmann::json(nullptr) : nlohmann::json(rep.cer());
  j["wer_per_sentence"] = {{"mean", rep.wer_per_sentence.mean}, {"std", rep.wer_per_sentence.std}};
  j["cer_per_sentence"] = {{"mean", rep.cer_per_sentence.mean}, {"std", rep.cer_per_sentence.std}};
  j["undefined_sentences"] = rep.undefined_sentences;
  if (per_sentence) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : rep.sentences) {
      arr.push_back({{"word", detail::rate_json(s.word)}, {"char", detail::rate_json(s.chr)}});
    }
    j["per_sentence"] = std::move(arr);
  }
  return j;
}

inline void write_table(std::ostream& os, const EvalReport& rep) {
  char buf[256];
  os << "level      S       D       I       N       micro    mean+-std\n";
  auto row = [&](const char* name, const RateCounts& r, const MeanStd& ms) {
    std::snprintf(buf, sizeof buf, "%-6s %7zu %7zu %7zu %7zu  %7.2f%%  %6.2f%% +- %.2f%%\n", name,
                  r.edits.substitutions, r.edits.deletions, r.edits.insertions, r.ref_length,
                  100.0 * r.rate(), 100.0 * ms.mean, 100.0 * ms.std);
    os << buf;
  };
  row("word", rep.word, rep.wer_per_sentence);
  row("char", rep.chr, rep.cer_per_sentence);
  os << "sentences: " << rep.sentences.size();
  if (rep.undefined_sentences) os << " (" << rep.undefined_sentences << " with empty reference)";
  os << '\n';
}

}  // namespace myotext
