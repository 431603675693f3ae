#pragma once

// Reference implementations used only by tests. Each one is written
// independently of the library code it checks.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "myotext/decoder.hpp"
#include "myotext/keymap.hpp"
#include "myotext/lexicon.hpp"

namespace oracle {

/// Canonical QWERTY assignment written out by hand.
inline int qwerty_finger(char c) {
  static const std::map<char, int> kTable = {
      {'q', 0}, {'a', 0}, {'z', 0}, {'w', 1}, {'s', 1}, {'x', 1}, {'e', 2}, {'d', 2}, {'c', 2},
      {'r', 3}, {'f', 3}, {'v', 3}, {'t', 3}, {'g', 3}, {'b', 3}, {'y', 6}, {'h', 6}, {'n', 6},
      {'u', 6}, {'j', 6}, {'m', 6}, {'i', 7}, {'k', 7}, {'o', 8}, {'l', 8}, {'p', 9}};
  return kTable.at(c);
}

/// Lexicon words whose letters fall in the positional pools, by linear scan.
inline std::vector<std::string> scan_matches(const std::vector<std::string>& words,
                                             const std::vector<std::string>& pools) {
  std::vector<std::string> out;
  for (const auto& w : words) {
    if (w.size() != pools.size()) continue;
    bool ok = true;
    for (std::size_t i = 0; i < w.size() && ok; ++i) ok = pools[i].find(w[i]) != std::string::npos;
    if (ok) out.push_back(w);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Edit counts by a forward table of (cost, S, D, I) tuples. At every cell
/// the move is chosen by cost first, then diagonal, deletion, insertion.
template <class Seq>
std::array<std::size_t, 3> edit_counts(const Seq& ref, const Seq& hyp) {
  struct Cell {
    std::size_t cost, s, d, i;
  };
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<Cell>> t(n + 1, std::vector<Cell>(m + 1));
  t[0][0] = {0, 0, 0, 0};
  for (std::size_t i = 1; i <= n; ++i) t[i][0] = {i, 0, i, 0};
  for (std::size_t j = 1; j <= m; ++j) t[0][j] = {j, 0, 0, j};
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const bool eq = ref[i - 1] == hyp[j - 1];
      Cell diag = t[i - 1][j - 1];
      diag.cost += eq ? 0 : 1;
      diag.s += eq ? 0 : 1;
      Cell del = t[i - 1][j];
      del.cost += 1;
      del.d += 1;
      Cell ins = t[i][j - 1];
      ins.cost += 1;
      ins.i += 1;
      Cell best = diag;
      if (del.cost < best.cost) best = del;
      if (ins.cost < best.cost) best = ins;
      t[i][j] = best;
    }
  }
  const Cell& c = t[n][m];
  return {c.s, c.d, c.i};
}

struct Best {
  std::string sentence;
  double score = 0.0;
};

/// Argmax over every combination of pool candidates, scoring each complete
/// sentence position by position with the same terms the decoder uses.
inline Best exhaustive_argmax(const std::vector<myotext::CandidatePool>& pools, myotext::Scorer& scorer,
                              const myotext::BeamConfig& cfg) {
  Best best;
  bool have = false;
  std::vector<std::size_t> idx(pools.size(), 0);
  const std::string end(myotext::kSentenceEnd);
  for (;;) {
    std::vector<std::string> words;
    double score = 0.0;
    for (std::size_t n = 0; n < pools.size(); ++n) {
      const auto& c = pools[n].candidates[idx[n]];
      const std::string w[1] = {c.word};
      const double lm = scorer.score(words, w, "")[0];
      score = score + lm + cfg.prior_weight * c.prior;
      words.push_back(c.word);
    }
    if (cfg.score_sentence_end) score += scorer.score(words, std::span<const std::string>(&end, 1), "")[0];
    std::string sentence;
    for (const auto& w : words) sentence += (sentence.empty() ? "" : " ") + w;
    if (!have || score > best.score || (score == best.score && sentence < best.sentence)) {
      best = {sentence, score};
      have = true;
    }
    std::size_t n = 0;
    while (n < pools.size() && ++idx[n] == pools[n].candidates.size()) idx[n++] = 0;
    if (n == pools.size()) break;
  }
  return best;
}

}  // namespace oracle
