#pragma once

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "myotext/errors.hpp"
#include "myotext/lexicon.hpp"
#include "myotext/lm.hpp"

namespace myotext {

/// Raised by scorers; the decoder rethrows it as DecodeError with the
/// word position being expanded.
class ScorerFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scores candidate next words given the words already chosen. The
/// sentence-end marker is requested as the candidate "</s>". Implementations
/// shared across decoding threads must tolerate concurrent calls.
class Scorer {
 public:
  virtual ~Scorer() = default;

  /// One finite log score per candidate, aligned with candidates.
  virtual std::vector<double> score(std::span<const std::string> context,
                                    std::span<const std::string> candidates,
                                    std::string_view prompt) = 0;
};

inline constexpr std::string_view kSentenceEnd = "</s>";

/// In-process scorer backed by an n-gram model; context starts at `<s>`.
class NGramScorer : public Scorer {
 public:
  explicit NGramScorer(const NGramModel& model) : model_(model) {}

  std::vector<double> score(std::span<const std::string> context,
                            std::span<const std::string> candidates, std::string_view) override {
    const std::size_t keep = static_cast<std::size_t>(std::max(model_.order() - 1, 0));
    std::vector<std::uint32_t> ctx;
    if (context.size() < keep) ctx.push_back(NGramModel::kBosId);
    const std::size_t from = context.size() > keep ? context.size() - keep : 0;
    for (std::size_t i = from; i < context.size(); ++i) ctx.push_back(model_.id(context[i]));
    std::vector<double> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) out.push_back(model_.logprob_ids(model_.id(c), ctx));
    return out;
  }

  const NGramModel& model() const { return model_; }

 private:
  const NGramModel& model_;
};

/// Line-delimited JSON scorer running as a child process.
///
///   request:  {"id":int, "context":[words], "candidates":[words], "prompt":string}
///   response: {"id":int, "logprobs":[float]}
///
/// One response line per request line, in order. Requests on one instance
/// are serialized. A timeout or malformed response marks the connection as
/// broken and every later call fails.
class SubprocessScorer : public Scorer {
 public:
  explicit SubprocessScorer(std::string command,
                            std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : command_(std::move(command)), timeout_(timeout) {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) throw ScorerFailure("socketpair failed");
    pid_ = ::fork();
    if (pid_ < 0) {
      ::close(fds[0]);
      ::close(fds[1]);
      throw ScorerFailure("fork failed");
    }
    if (pid_ == 0) {
      ::setpgid(0, 0);
      ::close(fds[0]);
      ::dup2(fds[1], STDIN_FILENO);
      ::dup2(fds[1], STDOUT_FILENO);
      ::close(fds[1]);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::setpgid(pid_, pid_);
    ::close(fds[1]);
    fd_ = fds[0];
  }

  SubprocessScorer(const SubprocessScorer&) = delete;
  SubprocessScorer& operator=(const SubprocessScorer&) = delete;

  ~SubprocessScorer() override { shutdown(); }

  std::vector<double> score(std::span<const std::string> context,
                            std::span<const std::string> candidates,
                            std::string_view prompt) override {
    std::lock_guard lock(mu_);
    if (broken_) throw ScorerFailure("scorer '" + command_ + "' is no longer usable");
    const std::int64_t id = next_id_++;
    nlohmann::json req = {{"id", id},
                          {"context", std::vector<std::string>(context.begin(), context.end())},
                          {"candidates", std::vector<std::string>(candidates.begin(), candidates.end())},
                          {"prompt", std::string(prompt)}};
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    try {
      send_all(req.dump() + "\n", deadline);
      const std::string line = read_line(deadline);
      nlohmann::json resp;
      try {
        resp = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        throw ScorerFailure("scorer response is not JSON: " + line.substr(0, 200));
      }
      if (!resp.is_object() || !resp.contains("id") || resp["id"] != id) {
        throw ScorerFailure("scorer response id mismatch (expected " + std::to_string(id) + ")");
      }
      const auto& lp = resp.contains("logprobs") ? resp["logprobs"] : nlohmann::json();
      if (!lp.is_array() || lp.size() != candidates.size()) {
        throw ScorerFailure("scorer returned wrong number of logprobs");
      }
      std::vector<double> out;
      out.reserve(lp.size());
      for (const auto& v : lp) {
        if (!v.is_number() || !std::isfinite(v.get<double>())) {
          throw ScorerFailure("scorer returned a non-finite logprob");
        }
        out.push_back(v.get<double>());
      }
      return out;
    } catch (const ScorerFailure&) {
      broken_ = true;
      throw;
    }
  }

 private:
  using Clock = std::chrono::steady_clock;

  int remaining_ms(Clock::time_point deadline) const {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    return static_cast<int>(std::max<std::int64_t>(left.count(), 0));
  }

  void send_all(const std::string& data, Clock::time_point deadline) {
    std::size_t off = 0;
    while (off < data.size()) {
      pollfd p{fd_, POLLOUT, 0};
      const int r = ::poll(&p, 1, remaining_ms(deadline));
      if (r == 0) throw ScorerFailure("scorer timed out accepting request");
      if (r < 0) throw ScorerFailure("poll failed");
      const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n <= 0) throw ScorerFailure("scorer closed its input");
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(Clock::time_point deadline) {
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      pollfd p{fd_, POLLIN, 0};
      const int r = ::poll(&p, 1, remaining_ms(deadline));
      if (r == 0) {
        throw ScorerFailure("scorer timed out after " + std::to_string(timeout_.count()) + " ms");
      }
      if (r < 0) throw ScorerFailure("poll failed");
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n <= 0) throw ScorerFailure("scorer exited without responding");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void shutdown() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
    if (pid_ > 0) {
      int status = 0;
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) != 0) {
          ::kill(-pid_, SIGKILL);
          pid_ = -1;
          return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
      ::kill(-pid_, SIGKILL);  // the shell and anything it started
      ::waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

  std::string command_;
  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int fd_ = -1;
  std::string buffer_;
  std::int64_t next_id_ = 0;
  bool broken_ = false;
  std::mutex mu_;
};

/// "Select exactly N words: G1 <SEP> G2 <SEP> ... GN <SEP>", candidates in
/// stored order.
inline std::string serialize_prompt(std::span<const CandidatePool> pools) {
  if (pools.empty()) throw DomainError("prompt needs at least one pool");
  std::string out = "Select exactly " + std::to_string(pools.size()) + " words:";
  for (std::size_t n = 0; n < pools.size(); ++n) {
    if (pools[n].candidates.empty()) throw DomainError("empty pool at position " + std::to_string(n));
    for (const auto& c : pools[n].candidates) out += " " + c.word;
    out += " <SEP>";
  }
  return out;
}

struct BeamConfig {
  std::size_t beam = 8;
  std::size_t n_best = 5;
  double prior_weight = 0.5;
  bool score_sentence_end = true;

  void validate() const {
    if (beam < 1) throw ConfigError("beam width must be >= 1");
    if (n_best < 1 || n_best > beam) throw ConfigError("n_best must lie in [1, beam]");
    if (!(prior_weight >= 0.0)) throw ConfigError("prior_weight must be >= 0");
  }
};

struct Hypothesis {
  std::vector<std::string> words;
  std::string sentence;
  double score = 0.0;
};

struct DecodeResult {
  Hypothesis best;
  std::vector<Hypothesis> nbest;  // best first
};

/// Higher score first; equal scores by sentence string.
inline bool hypothesis_before(const Hypothesis& a, const Hypothesis& b) {
  return a.score != b.score ? a.score > b.score : a.sentence < b.sentence;
}

/// Left-to-right constrained beam search. Every surviving hypothesis is
/// extended by every candidate of the next pool; each extension adds the
/// scorer's log score plus prior_weight times the candidate prior, and the
/// best `beam` extensions survive.
inline DecodeResult decode(std::span<const CandidatePool> pools, Scorer& scorer, const BeamConfig& cfg) {
  cfg.validate();
  for (std::size_t n = 0; n < pools.size(); ++n) {
    if (pools[n].candidates.empty()) {
      throw DomainError("empty candidate pool at position " + std::to_string(n));
    }
  }
  const std::string prompt = pools.empty() ? std::string() : serialize_prompt(pools);

  auto ask = [&](std::size_t position, const Hypothesis& h, std::span<const std::string> cands) {
    std::vector<double> s;
    try {
      s = scorer.score(h.words, cands, prompt);
    } catch (const ScorerFailure& e) {
      throw DecodeError(position, e.what());
    }
    if (s.size() != cands.size()) throw DecodeError(position, "scorer returned wrong number of scores");
    for (double v : s) {
      if (!std::isfinite(v)) throw DecodeError(position, "scorer returned a non-finite score");
    }
    return s;
  };

  std::vector<Hypothesis> beam(1);
  for (std::size_t n = 0; n < pools.size(); ++n) {
    const auto& cands = pools[n].candidates;
    std::vector<std::string> words;
    words.reserve(cands.size());
    for (const auto& c : cands) words.push_back(c.word);

    std::vector<Hypothesis> next;
    next.reserve(beam.size() * cands.size());
    for (const auto& h : beam) {
      const auto lm = ask(n, h, words);
      for (std::size_t i = 0; i < cands.size(); ++i) {
        Hypothesis e;
        e.words = h.words;
        e.words.push_back(cands[i].word);
        e.sentence = h.sentence.empty() ? cands[i].word : h.sentence + " " + cands[i].word;
        e.score = h.score + lm[i] + cfg.prior_weight * cands[i].prior;
        next.push_back(std::move(e));
      }
    }
    const std::size_t keep = std::min(cfg.beam, next.size());
    std::partial_sort(next.begin(), next.begin() + keep, next.end(), hypothesis_before);
    next.resize(keep);
    beam = std::move(next);
  }

  if (cfg.score_sentence_end && !pools.empty()) {
    const std::string end(kSentenceEnd);
    for (auto& h : beam) h.score += ask(pools.size(), h, std::span<const std::string>(&end, 1))[0];
    std::sort(beam.begin(), beam.end(), hypothesis_before);
  }

  DecodeResult r;
  r.best = beam.front();
  beam.resize(std::min(cfg.n_best, beam.size()));
  r.nbest = std::move(beam);
  return r;
}

/// Score of a fixed word sequence under the same decomposition decode uses.
inline double rescore(std::span<const std::string> words, std::span<const CandidatePool> pools,
                      Scorer& scorer, const BeamConfig& cfg) {
  if (words.size() != pools.size()) throw DomainError("word count differs from pool count");
  const std::string prompt = pools.empty() ? std::string() : serialize_prompt(pools);
  double total = 0.0;
  std::vector<std::string> ctx;
  for (std::size_t n = 0; n < words.size(); ++n) {
    const auto& cands = pools[n].candidates;
    const auto it = std::find_if(cands.begin(), cands.end(), [&](const Candidate& c) { return c.word == words[n]; });
    if (it == cands.end()) throw DomainError("word '" + words[n] + "' is not in pool " + std::to_string(n));
    const std::string w = words[n];
    total = total + scorer.score(ctx, std::span<const std::string>(&w, 1), prompt)[0] +
            cfg.prior_weight * it->prior;
    ctx.push_back(w);
  }
  if (cfg.score_sentence_end && !pools.empty()) {
    const std::string end(kSentenceEnd);
    total += scorer.score(ctx, std::span<const std::string>(&end, 1), prompt)[0];
  }
  return total;
}

enum class EmptyPoolPolicy { kPlaceholder, kFallback, kError };

inline EmptyPoolPolicy parse_empty_pool_policy(std::string_view s) {
  if (s == "placeholder") return EmptyPoolPolicy::kPlaceholder;
  if (s == "fallback") return EmptyPoolPolicy::kFallback;
  if (s == "error") return EmptyPoolPolicy::kError;
  throw ConfigError("unknown empty-pool policy '" + std::string(s) + "'");
}

inline std::string_view to_string(EmptyPoolPolicy p) {
  switch (p) {
    case EmptyPoolPolicy::kPlaceholder: return "placeholder";
    case EmptyPoolPolicy::kFallback: return "fallback";
    case EmptyPoolPolicy::kError: return "error";
  }
  return "?";
}

inline constexpr std::string_view kPlaceholderWord = "<unk>";

/// Fills an EmptyPool outcome: the placeholder token, the best fallback
/// strings (at least one), or a DomainError.
inline void resolve_empty_pool(CandidatePool& pool, EmptyPoolPolicy policy, const Lexicon& lex,
                               const CandidateConfig& cfg) {
  if (!pool.empty()) return;
  switch (policy) {
    case EmptyPoolPolicy::kPlaceholder:
      pool.candidates.push_back({std::string(kPlaceholderWord), CandidateSource::kPlaceholder, 0.0});
      return;
    case EmptyPoolPolicy::kFallback: {
      auto extra = fallback_candidates(pool.pools, std::max<std::size_t>(cfg.fallback_k, 1),
                                       lex.letter_model(), [&](std::string_view s) { return lex.contains(s); });
      for (auto& s : extra) {
        pool.candidates.push_back({std::move(s.text), CandidateSource::kFallback, s.log_prob - cfg.fallback_penalty});
      }
      sort_candidates(pool.candidates);
      if (pool.empty()) throw DomainError("no fallback candidates for position " + std::to_string(pool.position));
      return;
    }
    case EmptyPoolPolicy::kError:
      throw DomainError("no lexicon candidates for word at position " + std::to_string(pool.position));
  }
}

inline nlohmann::json to_json(const DecodeResult& r) {
  nlohmann::json nb = nlohmann::json::array();
  for (const auto& h : r.nbest) nb.push_back({{"sentence", h.sentence}, {"score", h.score}});
  return {{"hyp", r.best.sentence}, {"score", r.best.score}, {"nbest", std::move(nb)}};
}

/// One sentence's worth of pool records from a pool JSONL stream.
struct SentencePools {
  std::int64_t sentence = 0;
  std::size_t first_line = 0;
  std::optional<std::string> ref;
  std::vector<CandidatePool> pools;
  std::optional<std::string> error;
};

struct DocumentRecord {
  std::optional<std::int64_t> sentence;
  std::size_t line = 0;
  nlohmann::json output;
  bool scorer_failed = false;
  bool invalid_input = false;
};

/// Groups pool records (one JSON object per word, carrying "sentence" and
/// "position") into sentences. Header records are skipped. A malformed line
/// is reported on its own and the sentence it would have completed is
/// flagged through the position gap it leaves.
inline std::vector<std::variant<SentencePools, DocumentRecord>> read_pool_document(std::istream& is) {
  std::vector<std::variant<SentencePools, DocumentRecord>> out;
  SentencePools* current = nullptr;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      if (!j.is_object()) throw DataError("record is not an object");
      if (j.contains("header")) continue;
      const auto sentence = j.at("sentence").get<std::int64_t>();
      const auto position = j.at("position").get<std::size_t>();
      CandidatePool pool = candidate_pool_from_json(j);
      pool.position = position;
      if (current == nullptr || current->sentence != sentence) {
        out.emplace_back(SentencePools{sentence, lineno, std::nullopt, {}, std::nullopt});
        current = &std::get<SentencePools>(out.back());
      }
      if (pool.position != current->pools.size() && !current->error) {
        current->error = "line " + std::to_string(lineno) + ": expected position " +
                         std::to_string(current->pools.size()) + ", got " + std::to_string(pool.position);
      }
      if (j.contains("ref") && j["ref"].is_string()) {
        const std::string w = j["ref"].get<std::string>();
        current->ref = current->ref ? *current->ref + " " + w : w;
      }
      current->pools.push_back(std::move(pool));
    } catch (const std::exception& e) {
      DocumentRecord bad;
      bad.line = lineno;
      bad.invalid_input = true;
      bad.output = {{"line", lineno}, {"error", std::string("malformed record: ") + e.what()}};
      out.emplace_back(std::move(bad));
      current = nullptr;
    }
  }
  return out;
}

/// Decodes every sentence of a pool document. Sentences are independent;
/// output order follows input order for any worker count.
inline std::vector<DocumentRecord> decode_document(std::istream& pools_jsonl, Scorer& scorer,
                                                   const BeamConfig& cfg, unsigned workers = 1) {
  cfg.validate();
  auto items = read_pool_document(pools_jsonl);
  std::vector<DocumentRecord> results(items.size());

  auto run = [&](std::size_t i) {
    if (auto* rec = std::get_if<DocumentRecord>(&items[i])) {
      results[i] = std::move(*rec);
      return;
    }
    auto& sp = std::get<SentencePools>(items[i]);
    DocumentRecord& r = results[i];
    r.sentence = sp.sentence;
    r.line = sp.first_line;
    nlohmann::json j = {{"sentence", sp.sentence}};
    if (sp.ref) j["ref"] = *sp.ref;
    if (sp.error) {
      j["error"] = *sp.error;
      r.invalid_input = true;
      r.output = std::move(j);
      return;
    }
    try {
      const DecodeResult d = decode(sp.pools, scorer, cfg);
      const nlohmann::json body = to_json(d);
      for (const auto& [k, v] : body.items()) j[k] = v;
    } catch (const DecodeError& e) {
      j["error"] = e.what();
      r.scorer_failed = true;
    } catch (const Error& e) {
      j["error"] = e.what();
      r.invalid_input = true;
    }
    r.output = std::move(j);
  };

  workers = std::max(1u, workers);
  if (workers == 1 || items.size() < 2) {
    for (std::size_t i = 0; i < items.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < items.size(); i = next++) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  return results;
}

}  // namespace myotext
