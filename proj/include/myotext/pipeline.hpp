#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "myotext/channel.hpp"
#include "myotext/decoder.hpp"
#include "myotext/errors.hpp"
#include "myotext/keymap.hpp"
#include "myotext/lexicon.hpp"
#include "myotext/lm.hpp"
#include "myotext/metrics.hpp"
#include "myotext/rng.hpp"

#ifndef MYOTEXT_DATA_DIR
#define MYOTEXT_DATA_DIR "data"
#endif

namespace myotext {

inline constexpr std::string_view kToolName = "myotext";
inline constexpr std::string_view kToolVersion = "0.1.0";

// Substream tags, so that variation and perturbation of sentence i never
// share random numbers.
inline constexpr std::uint64_t kVariationTag = 1;
inline constexpr std::uint64_t kPerturbTag = 2;

/// Bundled data directory; MYOTEXT_DATA_DIR in the environment wins over the
/// build-time location.
inline std::filesystem::path data_dir() {
  if (const char* env = std::getenv("MYOTEXT_DATA_DIR"); env && *env) return env;
  return MYOTEXT_DATA_DIR;
}

/// Flat key=value document with [section] headers. Keys are stored as
/// "section.key". Blank lines and lines starting with '#' or ';' are ignored.
class Config {
 public:
  Config() = default;

  static Config parse(std::istream& is, std::filesystem::path base_dir = {}) {
    Config c;
    c.base_dir_ = std::move(base_dir);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#' || t[0] == ';') continue;
      if (t.front() == '[') {
        if (t.back() != ']' || t.size() < 3) throw ParseError(lineno, "bad section header");
        section = trim(t.substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
      const std::string key = trim(t.substr(0, eq));
      if (key.empty()) throw ParseError(lineno, "empty key");
      c.values_[section.empty() ? key : section + "." + key] = trim(t.substr(eq + 1));
    }
    return c;
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    return parse(in, path.parent_path());
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  /// "section.key=value" override from the command line.
  void set_assignment(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw UsageError("override '" + std::string(assignment) + "' is not section.key=value");
    }
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get(const std::string& key, const std::string& fallback = {}) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(key + ": '" + v + "' is not a number");
    }
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    try {
      std::size_t used = 0;
      const long long n = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return n;
    } catch (const std::exception&) {
      throw ConfigError(key + ": '" + v + "' is not an integer");
    }
  }

  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    try {
      std::size_t used = 0;
      if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
      const unsigned long long n = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return n;
    } catch (const std::exception&) {
      throw ConfigError(key + ": '" + v + "' is not a non-negative integer");
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": '" + v + "' is not a boolean");
  }

  /// Empty when unset or blank. "bundled:" names a file under data_dir();
  /// other relative paths are taken relative to the config file.
  std::optional<std::filesystem::path> get_path(const std::string& key) const {
    const std::string v = get(key);
    if (v.empty()) return std::nullopt;
    return resolve_path(v);
  }

  std::filesystem::path resolve_path(const std::string& v) const {
    if (v.rfind("bundled:", 0) == 0) return data_dir() / v.substr(8);
    std::filesystem::path p(v);
    if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
    return p;
  }

  /// Rejects keys outside `known`, so typos do not pass silently.
  void check_known(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_) {
      if (!known.count(k)) throw ConfigError("unknown key '" + k + "'");
    }
  }

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::filesystem::path& base_dir() const { return base_dir_; }
  void set_base_dir(std::filesystem::path dir) { base_dir_ = std::move(dir); }

  /// Entries that determine results: everything except run.workers.
  std::map<std::string, std::string> effective() const {
    auto out = values_;
    out.erase("run.workers");
    return out;
  }

  /// FNV-1a (64-bit) over the sorted effective entries, as hex.
  std::string hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](std::string_view s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
    };
    for (const auto& [k, v] : effective()) {
      feed(k);
      feed("=");
      feed(v);
      feed("\n");
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : effective()) j[k] = v;
    return j;
  }

 private:
  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
  }

  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
};

inline nlohmann::json header_record(std::string_view command, const Config& cfg, std::uint64_t seed) {
  return {{"header",
           {{"tool", kToolName},
            {"version", kToolVersion},
            {"command", command},
            {"config_hash", cfg.hash()},
            {"seed", seed}}}};
}

inline bool is_header(const nlohmann::json& j) { return j.is_object() && j.contains("header"); }

/// Parses a JSONL stream, skipping blank lines and header records.
/// Malformed lines raise ParseError with their line number.
template <class Visit>
void for_each_record(std::istream& is, Visit&& visit) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
    }
    if (is_header(j)) continue;
    visit(j, lineno);
  }
}

// ---------------------------------------------------------------------------
// Defaults and component construction

/// Every recognised key with its default value.
inline const std::map<std::string, std::string>& pipeline_defaults() {
  static const std::map<std::string, std::string> kDefaults = {
      {"keymap.mode", "canonical"},
      {"keymap.file", ""},
      {"keymap.space_finger", "4"},
      {"lexicon.wordlist", "bundled:lexicon/scowl_en_50.txt"},
      {"lexicon.frequency_corpus", "bundled:corpus/sotu_train.txt"},
      {"lexicon.fallback_k", "0"},
      {"lexicon.fallback_penalty", "5"},
      {"lexicon.max_word_len", "24"},
      {"lexicon.empty_pool", "placeholder"},
      {"channel.accuracy", "1"},
      {"channel.space_error_rate", "0"},
      {"channel.confusion", ""},
      {"channel.split_adjacent", "0.7"},
      {"channel.split_mirror", "0.2"},
      {"channel.split_rest", "0.1"},
      {"channel.variation", "0"},
      {"lm.arpa", ""},
      {"lm.corpus", "bundled:corpus/sotu_train.txt"},
      {"lm.order", "3"},
      {"lm.smoothing", "stupid_backoff"},
      {"lm.alpha", "0.4"},
      {"lm.k", "0.1"},
      {"decoder.beam", "8"},
      {"decoder.n_best", "5"},
      {"decoder.prior_weight", "0.5"},
      {"decoder.score_sentence_end", "true"},
      {"decoder.scorer_cmd", ""},
      {"decoder.timeout_ms", "10000"},
      {"run.input", "bundled:demo/sentences.txt"},
      {"run.seed", "0"},
      {"run.workers", "1"},
      {"run.limit", "0"},
  };
  return kDefaults;
}

/// Defaults overlaid with cfg; unknown keys are rejected.
inline Config with_defaults(const Config& cfg) {
  std::set<std::string> known;
  for (const auto& [k, v] : pipeline_defaults()) known.insert(k);
  cfg.check_known(known);
  Config out;
  out.set_base_dir(cfg.base_dir());
  for (const auto& [k, v] : pipeline_defaults()) out.set(k, v);
  for (const auto& [k, v] : cfg.values()) out.set(k, v);
  return out;
}

inline KeyMap keymap_from(const Config& cfg) {
  const FingerId space{static_cast<int>(cfg.get_int("keymap.space_finger", 4))};
  if (const auto file = cfg.get_path("keymap.file")) {
    std::ifstream in(*file);
    if (!in) throw IoError("cannot read keymap " + file->string());
    return read_keymap(in);
  }
  return canonical_keymap(space);
}

inline CandidateConfig candidate_config_from(const Config& cfg) {
  CandidateConfig c;
  const auto k = cfg.get_int("lexicon.fallback_k", 0);
  const auto len = cfg.get_int("lexicon.max_word_len", 24);
  if (k < 0) throw ConfigError("lexicon.fallback_k must be >= 0");
  if (len < 1) throw ConfigError("lexicon.max_word_len must be >= 1");
  c.fallback_k = static_cast<std::size_t>(k);
  c.max_word_len = static_cast<std::size_t>(len);
  c.fallback_penalty = cfg.get_double("lexicon.fallback_penalty", 5.0);
  return c;
}

inline Lexicon lexicon_from(const Config& cfg) {
  const auto words = cfg.get_path("lexicon.wordlist");
  if (!words) throw ConfigError("lexicon.wordlist is required");
  return load_lexicon(*words, cfg.get_path("lexicon.frequency_corpus")).lexicon;
}

inline ConfusionModel confusion_from(const Config& cfg) {
  ConfusionModel cm;
  if (const auto file = cfg.get_path("channel.confusion")) {
    std::ifstream in(*file);
    if (!in) throw IoError("cannot read confusion model " + file->string());
    try {
      cm = confusion_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(file->string() + ": " + e.what());
    }
  } else {
    const ConfusionSplit split{cfg.get_double("channel.split_adjacent", 0.7),
                               cfg.get_double("channel.split_mirror", 0.2),
                               cfg.get_double("channel.split_rest", 0.1)};
    cm = default_confusion(cfg.get_double("channel.accuracy", 1.0), split);
  }
  if (cfg.has("channel.space_error_rate")) cm.space_error_rate = cfg.get_double("channel.space_error_rate", 0.0);
  cm.validate();
  return cm;
}

inline SmoothingConfig smoothing_from(const Config& cfg) {
  SmoothingConfig s;
  s.kind = parse_smoothing(cfg.get("lm.smoothing", "stupid_backoff"));
  s.alpha = cfg.get_double("lm.alpha", 0.4);
  s.k = cfg.get_double("lm.k", 0.1);
  return s;
}

inline NGramModel lm_from(const Config& cfg) {
  if (const auto arpa = cfg.get_path("lm.arpa")) return read_arpa_file(*arpa);
  const auto corpus = cfg.get_path("lm.corpus");
  if (!corpus) throw ConfigError("either lm.arpa or lm.corpus is required");
  return train_ngram_file(*corpus, static_cast<int>(cfg.get_int("lm.order", 3)), smoothing_from(cfg));
}

inline BeamConfig beam_config_from(const Config& cfg) {
  BeamConfig b;
  const auto beam = cfg.get_int("decoder.beam", 8);
  const auto nb = cfg.get_int("decoder.n_best", 5);
  if (beam < 1) throw ConfigError("beam width must be >= 1");
  if (nb < 1) throw ConfigError("n_best must be >= 1");
  b.beam = static_cast<std::size_t>(beam);
  b.n_best = static_cast<std::size_t>(nb);
  b.prior_weight = cfg.get_double("decoder.prior_weight", 0.5);
  b.score_sentence_end = cfg.get_bool("decoder.score_sentence_end", true);
  b.validate();
  return b;
}

// ---------------------------------------------------------------------------
// Stages. Each works on one sentence so that the CLI stages and e2e share
// exactly the same code path.

struct InputSentence {
  std::size_t index = 0;  // line number minus one
  std::string text;
};

struct InputRejection {
  std::size_t line = 0;
  std::string error;
};

struct InputText {
  std::vector<InputSentence> sentences;
  std::vector<InputRejection> rejected;
};

/// Reads one sentence per line, folding case. Lines that are empty or hold
/// characters outside a-z and single spaces are rejected with a reason.
inline InputText read_input_text(std::istream& is, std::size_t limit = 0) {
  InputText out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      out.rejected.push_back({lineno, "empty sentence"});
      continue;
    }
    std::string text = fold_case(line);
    try {
      validate_text(text);
    } catch (const InvalidCharacter& e) {
      out.rejected.push_back({lineno, std::string(e.what()) + " at column " + std::to_string(e.index() + 1)});
      continue;
    }
    out.sentences.push_back({lineno - 1, std::move(text)});
    if (limit && out.sentences.size() >= limit) break;
  }
  return out;
}

/// encode stage: canonical fingering, or per-letter variation when p > 0.
inline FingerEventRecord encode_sentence(const InputSentence& s, const KeyMap& km, double variation,
                                         std::uint64_t seed) {
  FingerEventRecord r;
  r.ref_text = s.text;
  r.seed = seed;
  if (variation > 0.0) {
    r.events = apply_variation(s.text, km, table_variation(km, variation),
                               substream_seed(seed, s.index, kVariationTag));
    char id[48];
    std::snprintf(id, sizeof id, "variation-p%.6g", variation);
    r.model_id = id;
  } else {
    r.events = fingers_for_text(s.text, km);
  }
  return r;
}

inline FingerEventRecord perturb_record(const FingerEventRecord& in, std::size_t sentence, const ConfusionModel& cm,
                                        std::uint64_t seed) {
  FingerEventRecord r = in;
  r.events = perturb(in.events, cm, substream_seed(seed, sentence, kPerturbTag));
  r.seed = seed;
  r.model_id = cm.model_id;
  return r;
}

struct PoolContext {
  const KeyMap* keymap = nullptr;
  PoolMode mode = PoolMode::kCanonical;
  const Lexicon* lexicon = nullptr;
  CandidateConfig candidates;
  EmptyPoolPolicy empty_policy = EmptyPoolPolicy::kPlaceholder;
};

struct PoolStats {
  std::size_t pools = 0;
  std::size_t candidates = 0;
  std::size_t empty = 0;        // no lexicon or fallback candidate before policy
  std::size_t over_length = 0;  // longer than max_word_len
  std::size_t unresolved = 0;   // left empty because the policy is "error"

  PoolStats& operator+=(const PoolStats& o) {
    pools += o.pools;
    candidates += o.candidates;
    empty += o.empty;
    over_length += o.over_length;
    unresolved += o.unresolved;
    return *this;
  }
  double mean_size() const { return pools ? static_cast<double>(candidates) / static_cast<double>(pools) : 0.0; }
};

/// pools stage: one record per typed word. When the event stream splits into
/// as many words as the reference, each record carries its reference word;
/// otherwise the whole reference rides on the first record.
inline std::vector<nlohmann::json> pool_records(const FingerEventRecord& rec, std::size_t sentence,
                                                const PoolContext& ctx, PoolStats* stats = nullptr) {
  const auto words = split_words(rec.events);
  std::vector<std::string> ref_words;
  if (rec.ref_text) ref_words = tokenize_words(*rec.ref_text);
  const bool aligned = ref_words.size() == words.size();

  PoolStats local;
  std::vector<nlohmann::json> out;
  for (std::size_t n = 0; n < words.size(); ++n) {
    CandidatePool pool;
    const auto& fingers = words[n];
    if (!fingers.empty() && fingers.size() <= ctx.candidates.max_word_len) {
      pool = candidate_words(fingers, *ctx.keymap, ctx.mode, *ctx.lexicon, ctx.candidates);
    } else {
      // Over-length (or empty, from adjacent thumb events): pools only.
      pool.fingers = fingers;
      for (FingerId f : fingers) pool.pools.push_back(letter_pool(*ctx.keymap, f, ctx.mode));
      ++local.over_length;
    }
    pool.position = n;
    if (pool.empty()) {
      ++local.empty;
      if (ctx.empty_policy == EmptyPoolPolicy::kError || pool.pools.empty()) {
        if (ctx.empty_policy != EmptyPoolPolicy::kError) {
          pool.candidates.push_back({std::string(kPlaceholderWord), CandidateSource::kPlaceholder, 0.0});
        } else {
          ++local.unresolved;
        }
      } else {
        resolve_empty_pool(pool, ctx.empty_policy, *ctx.lexicon, ctx.candidates);
      }
    }
    ++local.pools;
    local.candidates += pool.candidates.size();

    nlohmann::json j = {{"sentence", sentence}, {"position", n}};
    if (aligned) {
      j["ref"] = ref_words[n];
    } else if (n == 0 && rec.ref_text) {
      j["ref"] = *rec.ref_text;
    }
    const nlohmann::json body = to_json(pool);
    for (const auto& [k, v] : body.items()) j[k] = v;
    out.push_back(std::move(j));
  }
  if (stats) *stats += local;
  return out;
}

inline nlohmann::json event_record_json(const FingerEventRecord& r, std::size_t sentence) {
  nlohmann::json j = {{"sentence", sentence}};
  const nlohmann::json body = to_json(r);
  for (const auto& [k, v] : body.items()) j[k] = v;
  return j;
}

/// Sentence references and hypotheses from a decode output stream; a
/// sentence without "hyp" (decode error) counts as an empty hypothesis.
struct HypRef {
  std::vector<std::string> refs;
  std::vector<std::string> hyps;
  std::size_t errors = 0;
};

inline HypRef collect_hyp_ref(const std::vector<DocumentRecord>& records) {
  HypRef out;
  for (const auto& r : records) {
    if (!r.sentence) {
      ++out.errors;
      continue;
    }
    out.refs.push_back(r.output.value("ref", std::string()));
    if (r.output.contains("hyp")) {
      out.hyps.push_back(r.output["hyp"].get<std::string>());
    } else {
      out.hyps.emplace_back();
      ++out.errors;
    }
  }
  return out;
}

/// Scorer selected by decoder.scorer_cmd: the external process when set,
/// otherwise the n-gram model.
struct ScorerHandle {
  std::unique_ptr<NGramModel> model;
  std::unique_ptr<Scorer> scorer;
};

inline ScorerHandle scorer_from(const Config& cfg) {
  ScorerHandle h;
  const std::string cmd = cfg.get("decoder.scorer_cmd");
  if (!cmd.empty()) {
    const auto ms = cfg.get_int("decoder.timeout_ms", 10000);
    if (ms < 1) throw ConfigError("decoder.timeout_ms must be >= 1");
    h.scorer = std::make_unique<SubprocessScorer>(cmd, std::chrono::milliseconds(ms));
  } else {
    h.model = std::make_unique<NGramModel>(lm_from(cfg));
    h.scorer = std::make_unique<NGramScorer>(*h.model);
  }
  return h;
}

struct E2EResult {
  nlohmann::json report;
  std::vector<DocumentRecord> hypotheses;
  bool scorer_failed = false;
};

/// encode -> (variation) -> perturb -> pools -> decode -> eval.
inline E2EResult run_e2e(const Config& user_cfg) {
  const Config cfg = with_defaults(user_cfg);
  const std::uint64_t seed = cfg.get_uint("run.seed", 0);
  const auto workers = cfg.get_int("run.workers", 1);
  if (workers < 1) throw ConfigError("run.workers must be >= 1");
  const auto limit = cfg.get_int("run.limit", 0);
  if (limit < 0) throw ConfigError("run.limit must be >= 0");
  const double variation = cfg.get_double("channel.variation", 0.0);
  if (!(variation >= 0.0 && variation <= 1.0)) throw ConfigError("channel.variation outside [0, 1]");

  const KeyMap km = keymap_from(cfg);
  const ConfusionModel cm = confusion_from(cfg);
  const BeamConfig beam = beam_config_from(cfg);
  const Lexicon lex = lexicon_from(cfg);
  PoolContext pctx{&km, parse_pool_mode(cfg.get("keymap.mode")), &lex, candidate_config_from(cfg),
                   parse_empty_pool_policy(cfg.get("lexicon.empty_pool"))};

  const auto input_path = cfg.get_path("run.input");
  if (!input_path) throw ConfigError("run.input is required");
  std::ifstream in(*input_path);
  if (!in) throw IoError("cannot read input " + input_path->string());
  const InputText input = read_input_text(in, static_cast<std::size_t>(limit));

  ScorerHandle scorer = scorer_from(cfg);

  std::size_t letters = 0, letters_correct = 0;
  PoolStats pstats;
  std::ostringstream pools_doc;
  for (const auto& s : input.sentences) {
    const FingerEventRecord clean = encode_sentence(s, km, variation, seed);
    const FingerEventRecord noisy = perturb_record(clean, s.index, cm, seed);
    const FingerEvents truth = fingers_for_text(s.text, km);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i].is_thumb()) continue;
      ++letters;
      if (truth[i] == noisy.events[i]) ++letters_correct;
    }
    for (const auto& rec : pool_records(noisy, s.index, pctx, &pstats)) pools_doc << rec.dump() << '\n';
  }

  std::istringstream pools_in(pools_doc.str());
  E2EResult res;
  res.hypotheses = decode_document(pools_in, *scorer.scorer, beam, static_cast<unsigned>(workers));
  std::size_t scorer_failures = 0, invalid = 0;
  for (const auto& r : res.hypotheses) {
    scorer_failures += r.scorer_failed;
    invalid += r.invalid_input;
  }
  res.scorer_failed = scorer_failures > 0;

  const HypRef hr = collect_hyp_ref(res.hypotheses);
  const EvalReport eval = evaluate(hr.refs, hr.hyps, "reference", "hypothesis");

  nlohmann::json rejected = nlohmann::json::array();
  for (const auto& r : input.rejected) rejected.push_back({{"line", r.line}, {"error", r.error}});

  nlohmann::json& rep = res.report;
  rep["header"] = header_record("e2e", cfg, seed)["header"];
  rep["config"] = cfg.to_json();
  rep["input"] = {{"sentences", input.sentences.size()}, {"rejected", std::move(rejected)}};
  rep["channel"] = {{"model_id", cm.model_id},
                    {"letters", letters},
                    {"finger_accuracy", letters ? static_cast<double>(letters_correct) / static_cast<double>(letters)
                                                : 1.0}};
  rep["pools"] = {{"count", pstats.pools},
                  {"mean_size", pstats.mean_size()},
                  {"empty", pstats.empty},
                  {"over_length", pstats.over_length},
                  {"unresolved", pstats.unresolved}};
  rep["decode"] = {{"sentences", hr.refs.size()}, {"scorer_failures", scorer_failures}, {"invalid", invalid}};
  rep["eval"] = to_json(eval);
  return res;
}

}  // namespace myotext
