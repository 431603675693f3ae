// myotext command-line interface.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "myotext/channel.hpp"
#include "myotext/decoder.hpp"
#include "myotext/errors.hpp"
#include "myotext/keymap.hpp"
#include "myotext/lexicon.hpp"
#include "myotext/lm.hpp"
#include "myotext/metrics.hpp"
#include "myotext/pipeline.hpp"
#include "myotext/signals.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace myotext;

namespace {

constexpr const char* kEventSchema =
    "Finger-event JSONL: first line {\"header\":{tool,version,command,config_hash,seed}}, then one\n"
    "record per sentence: {\"sentence\":int, \"ref_text\":string?, \"events\":[finger...],\n"
    "\"seed\":int, \"model_id\":string}. Fingers 0-4 left pinky..left thumb, 5-9 right thumb..right pinky.";

constexpr const char* kPoolSchema =
    "Pool JSONL: header line, then one record per typed word: {\"sentence\":int, \"position\":int,\n"
    "\"ref\":string?, \"fingers\":[int], \"pools\":[letters per position],\n"
    "\"candidates\":[{\"word\",\"source\":lexicon|fallback|placeholder,\"score\"}]}.";

constexpr const char* kHypSchema =
    "Hypothesis JSONL: header line, then one record per sentence in input order:\n"
    "{\"sentence\":int, \"ref\":string?, \"hyp\":string, \"score\":float,\n"
    "\"nbest\":[{\"sentence\",\"score\"}]} or {\"sentence\"|\"line\", \"error\":string} on failure.";

constexpr const char* kScorerProtocol =
    "External scorer: a shell command speaking line JSON on stdin/stdout. Request\n"
    "{\"id\":int,\"context\":[words],\"candidates\":[words],\"prompt\":string}; response\n"
    "{\"id\":int,\"logprobs\":[float]} aligned with candidates. One response per request, in order.";

/// Flags that mirror config keys write into this map; explicit flags win
/// over --config values.
struct Overrides {
  std::optional<fs::path> config_file;
  std::map<std::string, std::string> values;

  Config build() const {
    Config c = config_file ? Config::load(*config_file) : Config();
    // Command-line paths are relative to the working directory, not the config.
    for (const auto& [k, v] : values) {
      const bool is_path = k == "keymap.file" || k == "lexicon.wordlist" || k == "lexicon.frequency_corpus" ||
                           k == "channel.confusion" || k == "lm.arpa" || k == "lm.corpus" || k == "run.input";
      c.set(k, is_path && !v.empty() && v.rfind("bundled:", 0) != 0 ? fs::absolute(v).string() : v);
    }
    return with_defaults(c);
  }
};

CLI::Option* bind(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key,
                  const std::string& help) {
  return app->add_option_function<std::string>(flag, [&ov, key](const std::string& v) { ov.values[key] = v; },
                                               help);
}

void add_config_option(CLI::App* app, Overrides& ov) {
  app->add_option_function<std::string>(
      "--config", [&ov](const std::string& v) { ov.config_file = v; },
      "key=value config file with [sections]; explicit flags win");
}

std::unique_ptr<std::istream> open_input(const std::string& path) {
  if (path == "-") return std::make_unique<std::istream>(std::cin.rdbuf());
  auto in = std::make_unique<std::ifstream>(path);
  if (!*in) throw IoError("cannot read " + path);
  return in;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw IoError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw IoError("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

FingerEventRecord read_event_record(const json& j, std::size_t lineno) {
  try {
    return finger_event_record_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(lineno, e.what());
  }
}

// ---------------------------------------------------------------------------

int cmd_keymap_show(const Overrides& ov) {
  const Config cfg = ov.build();
  const KeyMap km = keymap_from(cfg);
  const PoolMode mode = parse_pool_mode(cfg.get("keymap.mode"));
  std::cout << "finger  " << to_string(mode) << " pool\n";
  for (FingerId f : kLetterFingers) {
    const LetterPool p = letter_pool(km, f, mode);
    std::cout << "  " << f.value() << "     [" << p.letters << "]\n";
  }
  std::cout << "  space  finger " << km.space_finger().value() << '\n';
  return 0;
}

int cmd_keymap_export(const Overrides& ov, const std::string& out_path) {
  const Config cfg = ov.build();
  const KeyMap km = keymap_from(cfg);
  Output out(out_path);
  if (parse_pool_mode(cfg.get("keymap.mode")) == PoolMode::kAugmented) {
    write_augmented_table(out.stream(), km);
  } else {
    write_keymap(out.stream(), km);
  }
  out.finish();
  return 0;
}

int cmd_encode(const Overrides& ov, const std::string& text_path, const std::string& out_path) {
  const Config cfg = ov.build();
  const KeyMap km = keymap_from(cfg);
  const std::uint64_t seed = cfg.get_uint("run.seed", 0);
  const double variation = cfg.get_double("channel.variation", 0.0);
  if (!(variation >= 0.0 && variation <= 1.0)) throw ConfigError("variation outside [0, 1]");
  auto in = open_input(text_path);
  const InputText input = read_input_text(*in);
  Output out(out_path);
  out.stream() << header_record("encode", cfg, seed).dump() << '\n';
  for (const auto& s : input.sentences) {
    out.stream() << event_record_json(encode_sentence(s, km, variation, seed), s.index).dump() << '\n';
  }
  out.finish();
  for (const auto& r : input.rejected) std::cerr << text_path << ':' << r.line << ": skipped: " << r.error << '\n';
  return input.rejected.empty() ? 0 : static_cast<int>(ExitCode::kData);
}

int cmd_perturb(const Overrides& ov, const std::string& events_path, const std::string& out_path) {
  const Config cfg = ov.build();
  const ConfusionModel cm = confusion_from(cfg);
  const std::uint64_t seed = cfg.get_uint("run.seed", 0);
  auto in = open_input(events_path);
  Output out(out_path);
  out.stream() << header_record("perturb", cfg, seed).dump() << '\n';
  std::size_t ordinal = 0;
  for_each_record(*in, [&](const json& j, std::size_t lineno) {
    const FingerEventRecord rec = read_event_record(j, lineno);
    const std::size_t sentence = j.value("sentence", ordinal);
    out.stream() << event_record_json(perturb_record(rec, sentence, cm, seed), sentence).dump() << '\n';
    ++ordinal;
  });
  out.finish();
  return 0;
}

int cmd_pools(const Overrides& ov, const std::string& events_path, const std::string& out_path) {
  const Config cfg = ov.build();
  const KeyMap km = keymap_from(cfg);
  const Lexicon lex = lexicon_from(cfg);
  const PoolContext ctx{&km, parse_pool_mode(cfg.get("keymap.mode")), &lex, candidate_config_from(cfg),
                        parse_empty_pool_policy(cfg.get("lexicon.empty_pool"))};
  auto in = open_input(events_path);
  Output out(out_path);
  out.stream() << header_record("pools", cfg, cfg.get_uint("run.seed", 0)).dump() << '\n';
  PoolStats stats;
  std::size_t ordinal = 0;
  for_each_record(*in, [&](const json& j, std::size_t lineno) {
    const FingerEventRecord rec = read_event_record(j, lineno);
    const std::size_t sentence = j.value("sentence", ordinal);
    for (const auto& r : pool_records(rec, sentence, ctx, &stats)) out.stream() << r.dump() << '\n';
    ++ordinal;
  });
  out.finish();
  std::cerr << "pools: " << stats.pools << ", mean size " << stats.mean_size() << ", empty " << stats.empty
            << ", over-length " << stats.over_length << '\n';
  return stats.unresolved ? static_cast<int>(ExitCode::kData) : 0;
}

int cmd_lm_train(const Overrides& ov, const std::string& corpus_path, const std::string& out_path) {
  const Config cfg = ov.build();
  auto in = open_input(corpus_path);
  const NGramModel m =
      train_ngram(read_sentences(*in), static_cast<int>(cfg.get_int("lm.order", 3)), smoothing_from(cfg));
  Output out(out_path);
  write_arpa(out.stream(), m);
  out.finish();
  std::cerr << "vocabulary " << m.vocab_size() << ", tokens " << m.total_count(1) << '\n';
  return 0;
}

int cmd_decode(const Overrides& ov, const std::string& pools_path, const std::string& out_path) {
  const Config cfg = ov.build();
  const BeamConfig beam = beam_config_from(cfg);
  const auto workers = cfg.get_int("run.workers", 1);
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (cfg.get("decoder.scorer_cmd").empty() && cfg.get("lm.arpa").empty()) {
    throw UsageError("decode needs --lm or --scorer-cmd");
  }
  ScorerHandle scorer = scorer_from(cfg);
  auto in = open_input(pools_path);
  const auto records = decode_document(*in, *scorer.scorer, beam, static_cast<unsigned>(workers));
  Output out(out_path);
  out.stream() << header_record("decode", cfg, cfg.get_uint("run.seed", 0)).dump() << '\n';
  bool failed = false, invalid = false;
  for (const auto& r : records) {
    out.stream() << r.output.dump() << '\n';
    failed |= r.scorer_failed;
    invalid |= r.invalid_input;
    if (r.output.contains("error")) {
      std::cerr << pools_path << ':' << r.line << ": " << r.output["error"].get<std::string>() << '\n';
    }
  }
  out.finish();
  if (failed) return static_cast<int>(ExitCode::kScorer);
  return invalid ? static_cast<int>(ExitCode::kData) : 0;
}

/// Sentences from a plain text file (one per line) or a JSONL stream, where
/// `field` names the string to take from each non-header record.
std::vector<std::string> read_sentence_file(const std::string& path, const std::string& field) {
  auto in = open_input(path);
  std::stringstream buf;
  buf << in->rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  std::vector<std::string> out;
  if (first != std::string::npos && text[first] == '{') {
    std::istringstream ss(text);
    for_each_record(ss, [&](const json& j, std::size_t lineno) {
      if (!j.contains("sentence") && j.contains("error")) return;  // unattributable malformed line
      if (j.contains(field) && j[field].is_string()) {
        out.push_back(j[field].get<std::string>());
      } else if (field == "hyp" && j.contains("error")) {
        out.emplace_back();
      } else if (field == "ref" && j.contains("ref_text")) {
        out.push_back(j["ref_text"].get<std::string>());
      } else {
        throw ParseError(lineno, "record has no \"" + field + "\" field");
      }
    });
  } else {
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      out.push_back(line);
    }
  }
  return out;
}

int cmd_eval(const std::string& ref_path, const std::string& hyp_path, unsigned workers, bool as_json,
             bool per_sentence, const std::string& out_path) {
  const auto refs = read_sentence_file(ref_path, "ref");
  const auto hyps = read_sentence_file(hyp_path, "hyp");
  const EvalReport rep = evaluate(refs, hyps, ref_path, hyp_path, workers);
  const json j = to_json(rep, per_sentence);
  if (!out_path.empty()) {
    Output out(out_path);
    out.stream() << j.dump(2) << '\n';
    out.finish();
  }
  if (as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_table(std::cout, rep);
  }
  return 0;
}

int cmd_analyze(const std::string& dir, double pre, double post, bool as_json, const std::string& out_path,
                const std::string& segments_dir) {
  const Recording rec = read_recording(dir);
  const Extraction ex = extract_segments(rec, pre, post);
  for (const auto& w : ex.warnings) std::cerr << "warning: " << w << '\n';
  std::size_t padded = 0;
  for (const auto& s : ex.segments) padded += s.padded;
  if (!segments_dir.empty()) write_segments(segments_dir, ex.segments);
  const FingerStats st = finger_stats(ex.segments);
  json j = to_json(st);
  j["segments"] = ex.segments.size();
  j["padded_segments"] = padded;
  j["pre_s"] = pre;
  j["post_s"] = post;
  j["sample_rate"] = rec.sample_rate;
  j["channels"] = rec.channels;
  if (!out_path.empty()) {
    Output out(out_path);
    out.stream() << j.dump(2) << '\n';
    out.finish();
  }
  if (as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_table(std::cout, st);
    std::cout << "segments: " << ex.segments.size() << " (" << padded << " padded)\n";
  }
  return 0;
}

/// Synthesis config keys ([synth] and [bursts] sections).
SynthConfig synth_config_from(const Config& cfg) {
  static const std::set<std::string> kKnown = {
      "synth.sample_rate", "synth.channels",     "synth.noise_floor_uv", "synth.activity_rms_mean_uv",
      "synth.activity_rms_std_uv", "synth.activity_span_s", "synth.tail_s", "synth.text",
      "synth.text_file",   "synth.interval_s",   "synth.start_s",        "synth.repeat",
      "bursts.0", "bursts.1", "bursts.2", "bursts.3", "bursts.4", "bursts.5", "bursts.6", "bursts.7",
      "bursts.8", "bursts.9"};
  cfg.check_known(kKnown);
  SynthConfig sc;
  sc.sample_rate = cfg.get_double("synth.sample_rate", sc.sample_rate);
  sc.channels = static_cast<int>(cfg.get_int("synth.channels", sc.channels));
  sc.noise_floor_uv = cfg.get_double("synth.noise_floor_uv", sc.noise_floor_uv);
  sc.activity_rms_mean_uv = cfg.get_double("synth.activity_rms_mean_uv", sc.activity_rms_mean_uv);
  sc.activity_rms_std_uv = cfg.get_double("synth.activity_rms_std_uv", sc.activity_rms_std_uv);
  sc.activity_span_s = cfg.get_double("synth.activity_span_s", sc.activity_span_s);
  sc.tail_s = cfg.get_double("synth.tail_s", sc.tail_s);
  for (int f = 0; f < 10; ++f) {
    const std::string key = "bursts." + std::to_string(f);
    if (!cfg.has(key)) continue;
    std::istringstream ss(cfg.get(key));
    BurstProfile b;
    if (!(ss >> b.duration_ms >> b.peak_uv)) throw ConfigError(key + ": expected '<duration_ms> <peak_uv>'");
    sc.bursts[f] = b;
  }
  std::string text = cfg.get("synth.text");
  if (const auto file = cfg.get_path("synth.text_file")) {
    std::ifstream in(*file);
    if (!in) throw IoError("cannot read " + file->string());
    const InputText it = read_input_text(in);
    text.clear();
    for (const auto& s : it.sentences) text += (text.empty() ? "" : " ") + s.text;
  }
  text = fold_case(text);
  if (text.empty()) throw ConfigError("synth.text or synth.text_file is required");
  const auto repeat = cfg.get_int("synth.repeat", 1);
  if (repeat < 1) throw ConfigError("synth.repeat must be >= 1");
  std::string all;
  for (std::int64_t i = 0; i < repeat; ++i) all += (i ? " " : "") + text;
  const double interval = cfg.get_double("synth.interval_s", 2.0);
  if (!(interval > 0.0)) throw ConfigError("synth.interval_s must be positive");
  sc.schedule = typing_schedule(all, canonical_keymap(), interval, cfg.get_double("synth.start_s", 1.0));
  return sc;
}

int cmd_synth(const std::string& config_path, std::uint64_t seed, const std::string& out_dir) {
  const Config cfg = Config::load(config_path);
  const SynthConfig sc = synth_config_from(cfg);
  const Recording rec = synthesize(sc, seed);
  json meta = {{"generator", "myotext synth"}, {"seed", seed}, {"config_hash", cfg.hash()}, {"config", cfg.to_json()}};
  write_recording(out_dir, rec, meta);
  std::cerr << "wrote " << rec.keystrokes.size() << " keystrokes, " << rec.n_samples << " samples x "
            << rec.channels << " channels to " << out_dir << '\n';
  return 0;
}

int cmd_e2e(const Overrides& ov, const std::vector<std::string>& sets, const std::string& out_path,
            const std::string& hyp_path) {
  Config cfg = ov.config_file ? Config::load(*ov.config_file) : Config();
  for (const auto& s : sets) cfg.set_assignment(s);
  for (const auto& [k, v] : ov.values) cfg.set(k, v);
  const E2EResult res = run_e2e(cfg);
  if (!hyp_path.empty()) {
    Output hyp(hyp_path);
    hyp.stream() << json{{"header", res.report["header"]}}.dump() << '\n';
    for (const auto& r : res.hypotheses) hyp.stream() << r.output.dump() << '\n';
    hyp.finish();
  }
  Output out(out_path);
  out.stream() << res.report.dump(2) << '\n';
  out.finish();
  return res.scorer_failed ? static_cast<int>(ExitCode::kScorer) : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"myotext: finger-event channel, lexicon pools, beam decoding and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  int rc = 0;
  std::function<int()> action;

  // keymap
  auto* keymap = app.add_subcommand("keymap", "Show or export the finger-to-letter tables");
  keymap->require_subcommand(1);
  Overrides km_ov;
  std::string km_out;
  auto* km_show = keymap->add_subcommand("show", "Print each finger's letter pool");
  auto* km_export = keymap->add_subcommand("export", "Write the keymap (letter<TAB>finger, SPACE<TAB>finger)");
  for (auto* sub : {km_show, km_export}) {
    add_config_option(sub, km_ov);
    sub->add_flag_callback("--augmented", [&] { km_ov.values["keymap.mode"] = "augmented"; },
                           "Use the augmented pools");
    bind(sub, km_ov, "--keymap", "keymap.file", "Custom keymap file");
  }
  km_export->add_option("-o,--output", km_out, "Output file (default stdout)");
  km_show->callback([&] { action = [&] { return cmd_keymap_show(km_ov); }; });
  km_export->callback([&] { action = [&] { return cmd_keymap_export(km_ov, km_out); }; });

  // encode
  Overrides enc_ov;
  std::string enc_text, enc_out;
  auto* encode = app.add_subcommand("encode", "Map sentences to finger events");
  encode->footer(kEventSchema);
  add_config_option(encode, enc_ov);
  encode->add_option("--text", enc_text, "Text file, one sentence per line ('-' for stdin)")->required();
  bind(encode, enc_ov, "--keymap", "keymap.file", "Custom keymap file");
  bind(encode, enc_ov, "--variation", "channel.variation", "Probability of an alternate augmented fingering")
      ->check(CLI::Range(0.0, 1.0));
  bind(encode, enc_ov, "--seed", "run.seed", "Base seed")->check(CLI::NonNegativeNumber);
  encode->add_option("-o,--output", enc_out, "Output JSONL (default stdout)");
  encode->callback([&] { action = [&] { return cmd_encode(enc_ov, enc_text, enc_out); }; });

  // perturb
  Overrides per_ov;
  std::string per_events, per_out;
  auto* perturb_cmd = app.add_subcommand("perturb", "Apply the confusion-matrix channel to finger events");
  perturb_cmd->footer(kEventSchema);
  add_config_option(perturb_cmd, per_ov);
  perturb_cmd->add_option("--events", per_events, "Finger-event JSONL ('-' for stdin)")->required();
  bind(perturb_cmd, per_ov, "--accuracy", "channel.accuracy", "Per-finger accuracy (diagonal)")
      ->check(CLI::Range(0.0, 1.0));
  bind(perturb_cmd, per_ov, "--space-error-rate", "channel.space_error_rate", "Thumb-to-letter error rate")
      ->check(CLI::Range(0.0, 1.0));
  bind(perturb_cmd, per_ov, "--confusion", "channel.confusion", "Confusion model JSON (overrides --accuracy)");
  bind(perturb_cmd, per_ov, "--seed", "run.seed", "Base seed")->check(CLI::NonNegativeNumber);
  perturb_cmd->add_option("-o,--output", per_out, "Output JSONL (default stdout)");
  perturb_cmd->callback([&] { action = [&] { return cmd_perturb(per_ov, per_events, per_out); }; });

  // pools
  Overrides pool_ov;
  std::string pool_events, pool_out;
  auto* pools = app.add_subcommand("pools", "Build per-word candidate pools");
  pools->footer(kPoolSchema);
  add_config_option(pools, pool_ov);
  pools->add_option("--events", pool_events, "Finger-event JSONL ('-' for stdin)")->required();
  pools->add_flag_callback("--augmented", [&] { pool_ov.values["keymap.mode"] = "augmented"; },
                           "Use the augmented letter pools");
  bind(pools, pool_ov, "--keymap", "keymap.file", "Custom keymap file");
  bind(pools, pool_ov, "--fallback-k", "lexicon.fallback_k", "Non-lexicon strings added per pool")
      ->check(CLI::NonNegativeNumber);
  bind(pools, pool_ov, "--empty-pool", "lexicon.empty_pool", "placeholder|fallback|error")
      ->check(CLI::IsMember({"placeholder", "fallback", "error"}));
  bind(pools, pool_ov, "--lexicon", "lexicon.wordlist", "Word list, one word per line");
  bind(pools, pool_ov, "--freq-corpus", "lexicon.frequency_corpus", "Corpus for word frequencies");
  bind(pools, pool_ov, "--max-word-len", "lexicon.max_word_len", "Longest word searched")
      ->check(CLI::PositiveNumber);
  pools->add_option("-o,--output", pool_out, "Output JSONL (default stdout)");
  pools->callback([&] { action = [&] { return cmd_pools(pool_ov, pool_events, pool_out); }; });

  // lm train
  auto* lm = app.add_subcommand("lm", "Language model tools");
  lm->require_subcommand(1);
  Overrides lm_ov;
  std::string lm_corpus, lm_out;
  auto* lm_train = lm->add_subcommand("train", "Train an n-gram model and write ARPA text");
  add_config_option(lm_train, lm_ov);
  lm_train->add_option("--corpus", lm_corpus, "Training text, one sentence per line")->required();
  bind(lm_train, lm_ov, "--order", "lm.order", "n-gram order")->check(CLI::PositiveNumber);
  bind(lm_train, lm_ov, "--smoothing", "lm.smoothing", "stupid_backoff|add_k")
      ->check(CLI::IsMember({"stupid_backoff", "add_k"}));
  bind(lm_train, lm_ov, "--alpha", "lm.alpha", "Stupid-backoff discount");
  bind(lm_train, lm_ov, "--k", "lm.k", "Add-k pseudo count");
  lm_train->add_option("-o,--output", lm_out, "ARPA output (default stdout)");
  lm_train->callback([&] { action = [&] { return cmd_lm_train(lm_ov, lm_corpus, lm_out); }; });

  // decode
  Overrides dec_ov;
  std::string dec_pools, dec_out;
  auto* decode_cmd = app.add_subcommand("decode", "Beam-search decode candidate pools");
  decode_cmd->footer(std::string(kPoolSchema) + "\n" + kHypSchema + "\n" + kScorerProtocol);
  add_config_option(decode_cmd, dec_ov);
  decode_cmd->add_option("--pools", dec_pools, "Pool JSONL ('-' for stdin)")->required();
  bind(decode_cmd, dec_ov, "--lm", "lm.arpa", "ARPA language model");
  bind(decode_cmd, dec_ov, "--scorer-cmd", "decoder.scorer_cmd", "External scorer command (replaces --lm)");
  bind(decode_cmd, dec_ov, "--timeout-ms", "decoder.timeout_ms", "External scorer timeout per request")
      ->check(CLI::PositiveNumber);
  bind(decode_cmd, dec_ov, "--beam", "decoder.beam", "Beam width")->check(CLI::PositiveNumber);
  bind(decode_cmd, dec_ov, "--n-best", "decoder.n_best", "n-best list length")->check(CLI::PositiveNumber);
  bind(decode_cmd, dec_ov, "--prior-weight", "decoder.prior_weight", "Weight of candidate priors")
      ->check(CLI::NonNegativeNumber);
  decode_cmd->add_flag_callback("--no-sentence-end", [&] { dec_ov.values["decoder.score_sentence_end"] = "false"; },
                                "Do not score the end-of-sentence token");
  bind(decode_cmd, dec_ov, "--workers", "run.workers", "Decoding threads")->check(CLI::PositiveNumber);
  decode_cmd->add_option("-o,--output", dec_out, "Output JSONL (default stdout)");
  decode_cmd->callback([&] { action = [&] { return cmd_decode(dec_ov, dec_pools, dec_out); }; });

  // eval
  std::string ev_ref, ev_hyp, ev_out;
  unsigned ev_workers = 1;
  bool ev_json = false, ev_per = false;
  auto* eval_cmd = app.add_subcommand("eval", "Word and character error rates");
  eval_cmd->footer(
      "Inputs are text (one sentence per line) or JSONL; from JSONL the reference is taken from \"ref\"\n"
      "(or \"ref_text\") and the hypothesis from \"hyp\". Records with an error count as empty hypotheses.");
  eval_cmd->add_option("--ref", ev_ref, "Reference file")->required();
  eval_cmd->add_option("--hyp", ev_hyp, "Hypothesis file")->required();
  eval_cmd->add_option("--workers", ev_workers, "Alignment threads")->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--json", ev_json, "Print the JSON report instead of the table");
  eval_cmd->add_flag("--per-sentence", ev_per, "Include per-sentence counts in the JSON report");
  eval_cmd->add_option("-o,--output", ev_out, "Also write the JSON report to this file");
  eval_cmd->callback([&] {
    action = [&] { return cmd_eval(ev_ref, ev_hyp, ev_workers, ev_json, ev_per, ev_out); };
  });

  // analyze
  std::string an_dir, an_out, an_segments;
  double an_pre = 1.0, an_post = 1.0;
  bool an_json = false;
  auto* analyze = app.add_subcommand("analyze", "Per-finger RMS statistics of a recording");
  analyze->footer("Recording directory: manifest.json, samples.f32 (float32 LE, channel-major), keystrokes.csv.");
  analyze->add_option("--recording", an_dir, "Recording directory")->required();
  analyze->add_option("--pre", an_pre, "Seconds before each keystroke")->check(CLI::PositiveNumber);
  analyze->add_option("--post", an_post, "Seconds after each keystroke")->check(CLI::PositiveNumber);
  analyze->add_flag("--json", an_json, "Print JSON instead of the table");
  analyze->add_option("-o,--output", an_out, "Also write the JSON report to this file");
  analyze->add_option("--segments-out", an_segments, "Write extracted segments to this directory");
  analyze->callback([&] {
    action = [&] { return cmd_analyze(an_dir, an_pre, an_post, an_json, an_out, an_segments); };
  });

  // synth
  std::string syn_config, syn_out;
  std::uint64_t syn_seed = 0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multichannel recording");
  synth->footer(
      "Config: [synth] sample_rate, channels, noise_floor_uv, activity_rms_mean_uv, activity_rms_std_uv,\n"
      "activity_span_s, tail_s, text | text_file, repeat, interval_s, start_s; [bursts] <finger> = <ms> <uV>.");
  synth->add_option("--config", syn_config, "Synthesis config file")->required();
  synth->add_option("--seed", syn_seed, "Seed");
  synth->add_option("-o,--output", syn_out, "Output recording directory")->required();
  synth->callback([&] { action = [&] { return cmd_synth(syn_config, syn_seed, syn_out); }; });

  // e2e
  Overrides e2e_ov;
  std::vector<std::string> e2e_sets;
  std::string e2e_out, e2e_hyp;
  auto* e2e = app.add_subcommand("e2e", "encode, perturb, pools, decode and eval in one run");
  e2e->footer(
      "Config sections: [keymap] mode file space_finger; [lexicon] wordlist frequency_corpus fallback_k\n"
      "fallback_penalty max_word_len empty_pool; [channel] accuracy space_error_rate confusion split_adjacent\n"
      "split_mirror split_rest variation; [lm] arpa corpus order smoothing alpha k; [decoder] beam n_best\n"
      "prior_weight score_sentence_end scorer_cmd timeout_ms; [run] input seed workers limit.\n"
      "Paths are relative to the config file; 'bundled:' names files in the bundled data directory.");
  add_config_option(e2e, e2e_ov);
  e2e->add_option("--set", e2e_sets, "Override a config entry: section.key=value (repeatable)");
  bind(e2e, e2e_ov, "--seed", "run.seed", "Base seed")->check(CLI::NonNegativeNumber);
  bind(e2e, e2e_ov, "--workers", "run.workers", "Decoding threads")->check(CLI::PositiveNumber);
  e2e->add_option("-o,--output", e2e_out, "Report JSON (default stdout)");
  e2e->add_option("--hyp-out", e2e_hyp, "Also write the hypothesis JSONL");
  e2e->callback([&] { action = [&] { return cmd_e2e(e2e_ov, e2e_sets, e2e_out, e2e_hyp); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  }

  try {
    rc = action ? action() : static_cast<int>(ExitCode::kUsage);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kIo);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed data: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kData);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kData);
  }
  return rc;
}
