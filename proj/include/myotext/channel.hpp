#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "myotext/errors.hpp"
#include "myotext/keymap.hpp"
#include "myotext/rng.hpp"

namespace myotext {

/// How the off-diagonal mass of a confusion row is distributed.
struct ConfusionSplit {
  double adjacent = 0.7;  // same-hand neighbours
  double mirror = 0.2;    // same finger on the other hand
  double rest = 0.1;      // uniform over everything else
};

/// Row-stochastic substitution model over the eight letter fingers
/// (rows/columns follow kLetterFingers).
struct ConfusionModel {
  using Matrix = std::array<std::array<double, 8>, 8>;

  Matrix matrix{};
  double space_error_rate = 0.0;
  std::string model_id = "custom";

  void validate() const {
    for (std::size_t r = 0; r < 8; ++r) {
      double sum = 0.0;
      for (double p : matrix[r]) {
        if (!(p >= 0.0)) throw ConfigError("confusion entries must be non-negative");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("confusion row " + std::to_string(r) + " sums to " + std::to_string(sum));
      }
    }
    if (!(space_error_rate >= 0.0 && space_error_rate <= 1.0)) {
      throw ConfigError("space_error_rate outside [0, 1]");
    }
  }

  double accuracy_of(FingerId f) const {
    const int i = letter_finger_index(f);
    return matrix[i][i];
  }
};

inline FingerId mirror_finger(FingerId f) { return FingerId{9 - f.value()}; }

inline bool adjacent_fingers(FingerId a, FingerId b) {
  return a.is_letter_finger() && b.is_letter_finger() && a.is_left() == b.is_left() &&
         std::abs(a.value() - b.value()) == 1;
}

inline ConfusionModel identity_confusion() {
  ConfusionModel cm;
  for (std::size_t i = 0; i < 8; ++i) cm.matrix[i][i] = 1.0;
  cm.model_id = "identity";
  return cm;
}

/// Diagonal = accuracy; the error mass 1 - accuracy is split between
/// adjacent fingers on the same hand, the mirror finger, and the remaining
/// fingers. Each share is spread uniformly over its group; the index fingers
/// and pinkies have one neighbour, so that neighbour takes the whole share.
inline ConfusionModel default_confusion(double accuracy, const ConfusionSplit& split = {}) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw ConfigError("accuracy outside [0, 1]");
  const double total = split.adjacent + split.mirror + split.rest;
  if (!(split.adjacent >= 0 && split.mirror >= 0 && split.rest >= 0) || total <= 0.0) {
    throw ConfigError("confusion split shares must be non-negative with positive sum");
  }
  ConfusionModel cm;
  const double err = 1.0 - accuracy;
  for (std::size_t r = 0; r < 8; ++r) {
    const FingerId truth = kLetterFingers[r];
    std::vector<std::size_t> adj, mir, rest;
    for (std::size_t c = 0; c < 8; ++c) {
      if (c == r) continue;
      const FingerId other = kLetterFingers[c];
      if (adjacent_fingers(truth, other)) {
        adj.push_back(c);
      } else if (other == mirror_finger(truth)) {
        mir.push_back(c);
      } else {
        rest.push_back(c);
      }
    }
    cm.matrix[r][r] = accuracy;
    for (auto c : adj) cm.matrix[r][c] += err * (split.adjacent / total) / adj.size();
    for (auto c : mir) cm.matrix[r][c] += err * (split.mirror / total) / mir.size();
    for (auto c : rest) cm.matrix[r][c] += err * (split.rest / total) / rest.size();
  }
  char id[64];
  std::snprintf(id, sizeof id, "default-acc%.6g", accuracy);
  cm.model_id = id;
  return cm;
}

inline std::size_t sample_row(const std::array<double, 8>& row, double u) {
  double acc = 0.0;
  for (std::size_t c = 0; c < 8; ++c) {
    acc += row[c];
    if (u < acc) return c;
  }
  // Rounding left u above the cumulative sum: take the last nonzero column.
  for (std::size_t c = 8; c-- > 0;) {
    if (row[c] > 0.0) return c;
  }
  return 7;
}

/// Resamples every letter-finger event from its confusion row. Thumb events
/// are replaced by a uniformly chosen letter finger with space_error_rate.
/// One uniform draw is consumed per event, so output depends only on
/// (events, model, seed).
inline FingerEvents perturb(std::span<const FingerId> events, const ConfusionModel& cm,
                            std::uint64_t seed) {
  Rng rng(seed);
  FingerEvents out;
  out.reserve(events.size());
  for (FingerId f : events) {
    const double u = uniform01(rng);
    if (f.is_thumb()) {
      if (u < cm.space_error_rate) {
        const auto pick = static_cast<std::size_t>(u / cm.space_error_rate * 8.0);
        out.push_back(kLetterFingers[std::min<std::size_t>(pick, 7)]);
      } else {
        out.push_back(f);
      }
      continue;
    }
    const int row = letter_finger_index(f);
    if (row < 0) throw DomainError("invalid finger " + std::to_string(f.value()));
    out.push_back(kLetterFingers[sample_row(cm.matrix[row], u)]);
  }
  return out;
}

struct Alternate {
  FingerId finger;
  double probability = 0.0;
};

/// Per-letter alternative fingerings. Every alternate must be a finger whose
/// augmented pool holds the letter.
class VariationModel {
 public:
  VariationModel() = default;

  void add(char letter, FingerId finger, double probability) {
    alternates_[letter].push_back({finger, probability});
  }

  const std::map<char, std::vector<Alternate>>& alternates() const { return alternates_; }

  void validate(const KeyMap& km) const {
    for (const auto& [letter, alts] : alternates_) {
      if (letter < 'a' || letter > 'z') throw ConfigError("variation for non-letter");
      const auto owners = augmented_owners(km, letter);
      double total = 0.0;
      for (const auto& a : alts) {
        if (std::find(owners.begin(), owners.end(), a.finger) == owners.end()) {
          throw ConfigError(std::string("finger ") + std::to_string(a.finger.value()) +
                            " is not an augmented owner of '" + letter + "'");
        }
        if (!(a.probability >= 0.0)) throw ConfigError("negative variation probability");
        total += a.probability;
      }
      if (total > 1.0 + 1e-12) {
        throw ConfigError(std::string("variation probabilities for '") + letter + "' exceed 1");
      }
    }
  }

 private:
  std::map<char, std::vector<Alternate>> alternates_;
};

/// Every non-canonical augmented owner of each letter, each with probability p.
inline VariationModel table_variation(const KeyMap& km, double p) {
  VariationModel vm;
  for (char c = 'a'; c <= 'z'; ++c) {
    const auto owners = augmented_owners(km, c);
    std::vector<FingerId> alts;
    for (FingerId f : owners) {
      if (f != km.finger_of(c)) alts.push_back(f);
    }
    for (FingerId f : alts) vm.add(c, f, p / static_cast<double>(alts.size()));
  }
  return vm;
}

/// Encodes text, emitting each letter from an alternate finger with the
/// configured probability. One uniform draw per character.
inline FingerEvents apply_variation(std::string_view text, const KeyMap& km,
                                    const VariationModel& vm, std::uint64_t seed) {
  vm.validate(km);
  FingerEvents events = fingers_for_text(text, km);
  Rng rng(seed);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const double u = uniform01(rng);
    if (text[i] == ' ') continue;
    const auto it = vm.alternates().find(text[i]);
    if (it == vm.alternates().end()) continue;
    double acc = 0.0;
    for (const auto& alt : it->second) {
      acc += alt.probability;
      if (u < acc) {
        events[i] = alt.finger;
        break;
      }
    }
  }
  return events;
}

/// Fraction of letter-finger positions where a and b agree.
inline double finger_accuracy(std::span<const FingerId> truth, std::span<const FingerId> observed) {
  if (truth.size() != observed.size()) throw DataError("event sequences differ in length");
  std::size_t n = 0, hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].is_thumb()) continue;
    ++n;
    if (truth[i] == observed[i]) ++hit;
  }
  return n == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(n);
}

// Finger-event record: {ref_text?, events:[int], seed, model_id}.

struct FingerEventRecord {
  std::optional<std::string> ref_text;
  FingerEvents events;
  std::uint64_t seed = 0;
  std::string model_id = "none";
};

inline nlohmann::json to_json(const FingerEventRecord& r) {
  nlohmann::json j;
  if (r.ref_text) j["ref_text"] = *r.ref_text;
  nlohmann::json ev = nlohmann::json::array();
  for (FingerId f : r.events) ev.push_back(f.value());
  j["events"] = std::move(ev);
  j["seed"] = r.seed;
  j["model_id"] = r.model_id;
  return j;
}

inline FingerEventRecord finger_event_record_from_json(const nlohmann::json& j) {
  FingerEventRecord r;
  if (j.contains("ref_text") && !j["ref_text"].is_null()) r.ref_text = j["ref_text"].get<std::string>();
  for (const auto& v : j.at("events")) {
    const FingerId f{v.get<int>()};
    if (!f.valid()) throw DataError("finger value " + std::to_string(f.value()) + " out of range");
    r.events.push_back(f);
  }
  r.seed = j.value("seed", std::uint64_t{0});
  r.model_id = j.value("model_id", std::string("none"));
  return r;
}

inline nlohmann::json to_json(const ConfusionModel& cm) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : cm.matrix) rows.push_back(row);
  nlohmann::json fingers = nlohmann::json::array();
  for (FingerId f : kLetterFingers) fingers.push_back(f.value());
  return {{"model_id", cm.model_id}, {"fingers", fingers}, {"matrix", rows},
          {"space_error_rate", cm.space_error_rate}};
}

inline ConfusionModel confusion_from_json(const nlohmann::json& j) {
  ConfusionModel cm;
  cm.model_id = j.value("model_id", std::string("custom"));
  cm.space_error_rate = j.value("space_error_rate", 0.0);
  const auto& rows = j.at("matrix");
  if (rows.size() != 8) throw DataError("confusion matrix must have 8 rows");
  for (std::size_t r = 0; r < 8; ++r) {
    if (rows[r].size() != 8) throw DataError("confusion matrix must have 8 columns");
    for (std::size_t c = 0; c < 8; ++c) cm.matrix[r][c] = rows[r][c].get<double>();
  }
  cm.validate();
  return cm;
}

}  // namespace myotext
