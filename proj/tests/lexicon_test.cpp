#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "myotext/lexicon.hpp"
#include "oracles.hpp"
#include "test_data.hpp"

using namespace myotext;

namespace {

std::vector<LetterPool> pools_for(std::vector<int> fingers, PoolMode mode = PoolMode::kCanonical) {
  std::vector<LetterPool> out;
  for (int f : fingers) out.push_back(letter_pool(canonical_keymap(), FingerId{f}, mode));
  return out;
}

FingerEvents events(std::vector<int> fingers) {
  FingerEvents out;
  for (int f : fingers) out.push_back(FingerId{f});
  return out;
}

std::set<std::string> lexicon_words(const CandidatePool& p) {
  std::set<std::string> out;
  for (const auto& c : p.candidates) {
    if (c.source == CandidateSource::kLexicon) out.insert(c.word);
  }
  return out;
}

}  // namespace

TEST(LoadLexiconTest, DedupAndFilter) {
  std::stringstream in("the\nthe\nCat\ndog-1\n");
  const LexiconLoad r = load_lexicon(in);
  EXPECT_EQ(r.lexicon.words(), (std::vector<std::string>{"cat", "the"}));
  EXPECT_EQ(r.dropped, 1u);
}

TEST(LoadLexiconTest, EmptyIsConfigError) {
  std::stringstream in("");
  EXPECT_THROW(load_lexicon(in), ConfigError);
  std::stringstream junk("1234\n--\n");
  EXPECT_THROW(load_lexicon(junk), ConfigError);
}

TEST(LoadLexiconTest, UnreadableIsIoError) {
  EXPECT_THROW(load_lexicon(std::filesystem::path("/nonexistent/words.txt")), IoError);
}

TEST(LoadLexiconTest, Frequencies) {
  std::stringstream words("the\nzebra\ncat\n");
  std::stringstream corpus("The cat saw the zebra and the cat\n");
  const Lexicon lex = load_lexicon(words, &corpus).lexicon;
  EXPECT_EQ(lex.frequency("the"), 3u);
  EXPECT_EQ(lex.frequency("cat"), 2u);
  EXPECT_EQ(lex.frequency("zebra"), 1u);
  EXPECT_EQ(lex.frequency("saw"), 0u);  // not a lexicon word
}

TEST(LoadLexiconTest, BundledFrequencyOrdering) {
  EXPECT_GT(testdata::lexicon().frequency("the"), testdata::lexicon().frequency("zebra"));
}

TEST(TrieTest, MembershipMatchesSet) {
  const Lexicon& lex = testdata::lexicon();
  for (std::size_t i = 0; i < lex.words().size(); i += 97) EXPECT_TRUE(lex.contains(lex.words()[i]));
  EXPECT_FALSE(lex.contains("qzxq"));
  EXPECT_FALSE(lex.contains(""));
  EXPECT_FALSE(lex.contains("Two"));
}

TEST(CandidateWordsTest, Two) {
  const CandidatePool p = candidate_words(events({3, 1, 8}), canonical_keymap(), PoolMode::kCanonical,
                                          testdata::lexicon());
  EXPECT_EQ(lexicon_words(p), (std::set<std::string>{"two"}));
}

TEST(CandidateWordsTest, Has) {
  const CandidatePool p = candidate_words(events({6, 0, 1}), canonical_keymap(), PoolMode::kCanonical,
                                          testdata::lexicon());
  const auto words = lexicon_words(p);
  for (const char* w : {"has", "haw", "jaw"}) EXPECT_TRUE(words.count(w)) << w;
  for (const auto& c : p.candidates) {
    ASSERT_EQ(c.word.size(), 3u);
    EXPECT_NE(std::string("hjmnuy").find(c.word[0]), std::string::npos);
    EXPECT_NE(std::string("aqz").find(c.word[1]), std::string::npos);
    EXPECT_NE(std::string("swx").find(c.word[2]), std::string::npos);
  }
}

TEST(CandidateWordsTest, ThisWithFallback) {
  CandidateConfig cfg;
  cfg.fallback_k = 2;
  const CandidatePool p = candidate_words(events({3, 6, 7, 1}), canonical_keymap(), PoolMode::kCanonical,
                                          testdata::lexicon(), cfg);
  std::size_t fallback = 0;
  bool has_this = false;
  for (const auto& c : p.candidates) {
    if (c.source == CandidateSource::kFallback) {
      ++fallback;
      EXPECT_FALSE(testdata::lexicon().contains(c.word));
    }
    has_this |= c.word == "this" && c.source == CandidateSource::kLexicon;
    EXPECT_TRUE(matches_pools(c.word, p.pools));
  }
  EXPECT_TRUE(has_this);
  EXPECT_EQ(fallback, 2u);
}

TEST(CandidateWordsTest, OrderingAndPriors) {
  const CandidatePool p = candidate_words(events({6, 0, 1}), canonical_keymap(), PoolMode::kCanonical,
                                          testdata::lexicon());
  for (std::size_t i = 1; i < p.candidates.size(); ++i) {
    const auto& a = p.candidates[i - 1];
    const auto& b = p.candidates[i];
    EXPECT_TRUE(a.prior > b.prior || (a.prior == b.prior && a.word < b.word));
  }
  for (const auto& c : p.candidates) {
    EXPECT_DOUBLE_EQ(c.prior, std::log(static_cast<double>(testdata::lexicon().frequency(c.word)) + 1.0));
  }
}

TEST(CandidateWordsTest, LengthAndPoolErrors) {
  const Lexicon& lex = testdata::lexicon();
  EXPECT_THROW(candidate_words(FingerEvents{}, canonical_keymap(), PoolMode::kCanonical, lex), DomainError);
  EXPECT_THROW(candidate_words(FingerEvents(25, FingerId{0}), canonical_keymap(), PoolMode::kCanonical, lex),
               DomainError);
  EXPECT_THROW(candidate_words(events({3, 4}), canonical_keymap(), PoolMode::kCanonical, lex), DomainError);
}

TEST(CandidateWordsTest, EmptyPoolOutcome) {
  // Nine right pinky presses: only "p" letters, no such word.
  const CandidatePool p = candidate_words(FingerEvents(9, FingerId{9}), canonical_keymap(), PoolMode::kCanonical,
                                          testdata::lexicon());
  EXPECT_TRUE(p.empty());
}

TEST(CandidateWordsTest, TrieEqualsLinearScan) {
  const Lexicon& lex = testdata::lexicon();
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(1, 7), pick(0, 7), mode(0, 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> fingers(len(rng));
    for (auto& f : fingers) f = kLetterFingers[pick(rng)].value();
    const PoolMode m = mode(rng) ? PoolMode::kAugmented : PoolMode::kCanonical;
    const auto pools = pools_for(fingers, m);
    std::vector<std::string> patterns;
    for (const auto& p : pools) patterns.push_back(p.letters);
    std::vector<std::string> trie;
    lex.trie().match(pools, [&](std::string_view w) { trie.emplace_back(w); });
    EXPECT_EQ(trie, oracle::scan_matches(lex.words(), patterns));
  }
}

TEST(CandidateWordsTest, AugmentationIsMonotone) {
  const Lexicon& lex = testdata::lexicon();
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> len(1, 6), pick(0, 7);
  for (int trial = 0; trial < 200; ++trial) {
    FingerEvents ev(len(rng));
    for (auto& f : ev) f = kLetterFingers[pick(rng)];
    const auto c = lexicon_words(candidate_words(ev, canonical_keymap(), PoolMode::kCanonical, lex));
    const auto a = lexicon_words(candidate_words(ev, canonical_keymap(), PoolMode::kAugmented, lex));
    EXPECT_TRUE(std::includes(a.begin(), a.end(), c.begin(), c.end()));
  }
}

TEST(CandidateWordsTest, Deterministic) {
  CandidateConfig cfg;
  cfg.fallback_k = 5;
  const auto a = to_json(candidate_words(events({3, 6, 7, 1}), canonical_keymap(), PoolMode::kAugmented,
                                         testdata::lexicon(), cfg));
  const auto b = to_json(candidate_words(events({3, 6, 7, 1}), canonical_keymap(), PoolMode::kAugmented,
                                         testdata::lexicon(), cfg));
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(FallbackTest, ZeroAndSingleton) {
  const Lexicon lex = Lexicon::from_words({"ba"});
  EXPECT_TRUE(fallback_candidates(pools_for({0, 3}), 0, lex.letter_model()).empty());
  const std::vector<LetterPool> single = {{FingerId{0}, "a", PoolMode::kCanonical},
                                          {FingerId{3}, "b", PoolMode::kCanonical}};
  const auto out = fallback_candidates(single, 1, lex.letter_model(), [&](std::string_view s) { return lex.contains(s); });
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].text, "ab");
  EXPECT_DOUBLE_EQ(out[0].log_prob, 0.0);
}

TEST(FallbackTest, MatchesFullEnumeration) {
  const Lexicon& lex = testdata::lexicon();
  for (const auto& fingers : {std::vector<int>{6, 0, 1}, std::vector<int>{3, 6, 7, 1}, std::vector<int>{9, 0, 3}}) {
    const auto pools = pools_for(fingers);
    // Enumerate the whole product and sort by (score desc, text asc).
    std::vector<std::pair<double, std::string>> all;
    std::vector<std::size_t> idx(pools.size(), 0);
    for (;;) {
      std::string s;
      for (std::size_t i = 0; i < pools.size(); ++i) s += pools[i].letters[idx[i]];
      if (!lex.contains(s)) all.emplace_back(lex.letter_model().log_prob(s, pools), s);
      std::size_t i = 0;
      while (i < pools.size() && ++idx[i] == pools[i].letters.size()) idx[i++] = 0;
      if (i == pools.size()) break;
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    const auto got =
        fallback_candidates(pools, 3, lex.letter_model(), [&](std::string_view s) { return lex.contains(s); });
    ASSERT_EQ(got.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(got[i].text, all[i].second);
      EXPECT_DOUBLE_EQ(got[i].log_prob, all[i].first);
    }
  }
}

TEST(FallbackTest, KLargerThanProduct) {
  const Lexicon lex = Lexicon::from_words({"ab"});
  const std::vector<LetterPool> pools = {{FingerId{0}, "aq", PoolMode::kCanonical},
                                         {FingerId{3}, "b", PoolMode::kCanonical}};
  const auto out = fallback_candidates(pools, 10, lex.letter_model(), [&](std::string_view s) { return lex.contains(s); });
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].text, "qb");
}

TEST(LetterModelTest, SmoothedWithinPool) {
  const Lexicon lex = Lexicon::from_words({"aa", "ab", "qb"});
  const LetterPool pool{FingerId{0}, "aqz", PoolMode::kCanonical};
  // position 0 counts: a=2, q=1, z=0 -> (2+1)/(3+2+1)
  EXPECT_NEAR(lex.letter_model().log_prob(0, 'a', pool), std::log(3.0 / 6.0), 1e-12);
  EXPECT_NEAR(lex.letter_model().log_prob(0, 'z', pool), std::log(1.0 / 6.0), 1e-12);
}

TEST(PoolJsonTest, RoundTrip) {
  CandidateConfig cfg;
  cfg.fallback_k = 2;
  const CandidatePool p = candidate_words(events({6, 0, 1}), canonical_keymap(), PoolMode::kCanonical,
                                          testdata::lexicon(), cfg);
  const nlohmann::json j = to_json(p);
  EXPECT_EQ(j["pools"], nlohmann::json({"hjmnuy", "aqz", "swx"}));
  const CandidatePool back = candidate_pool_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.candidates, p.candidates);
  EXPECT_EQ(back.fingers, p.fingers);
}
