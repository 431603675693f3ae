#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <compare>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "myotext/errors.hpp"

namespace myotext {

/// Finger index 0-9: 0-3 left pinky..index, 4-5 thumbs, 6-9 right index..pinky.
class FingerId {
 public:
  constexpr FingerId() = default;
  constexpr explicit FingerId(int value) : value_(value) {}

  constexpr int value() const { return value_; }
  constexpr bool valid() const { return value_ >= 0 && value_ <= 9; }
  constexpr bool is_thumb() const { return value_ == 4 || value_ == 5; }
  constexpr bool is_letter_finger() const { return valid() && !is_thumb(); }
  constexpr bool is_left() const { return value_ >= 0 && value_ <= 4; }

  constexpr auto operator<=>(const FingerId&) const = default;

 private:
  int value_ = 0;
};

using FingerEvents = std::vector<FingerId>;

inline constexpr std::array<FingerId, 8> kLetterFingers = {
    FingerId{0}, FingerId{1}, FingerId{2}, FingerId{3},
    FingerId{6}, FingerId{7}, FingerId{8}, FingerId{9}};

/// Position of a letter finger in kLetterFingers, or -1.
constexpr int letter_finger_index(FingerId f) {
  if (!f.is_letter_finger()) return -1;
  return f.value() < 4 ? f.value() : f.value() - 2;
}

enum class PoolMode { kCanonical, kAugmented };

inline std::string_view to_string(PoolMode mode) {
  return mode == PoolMode::kCanonical ? "canonical" : "augmented";
}

inline PoolMode parse_pool_mode(std::string_view s) {
  if (s == "canonical") return PoolMode::kCanonical;
  if (s == "augmented") return PoolMode::kAugmented;
  throw ConfigError("unknown pool mode '" + std::string(s) + "'");
}

struct LetterPool {
  FingerId finger;
  std::string letters;  // sorted, unique
  PoolMode mode = PoolMode::kCanonical;

  bool contains(char c) const { return letters.find(c) != std::string::npos; }
};

/// Total map a-z -> letter finger plus the thumb used for space.
class KeyMap {
 public:
  KeyMap(const std::array<FingerId, 26>& letter_to_finger, FingerId space_finger)
      : letter_to_finger_(letter_to_finger), space_finger_(space_finger) {
    for (int i = 0; i < 26; ++i) {
      if (!letter_to_finger_[i].is_letter_finger()) {
        throw ConfigError(std::string("letter '") + char('a' + i) +
                          "' mapped to non-letter finger " +
                          std::to_string(letter_to_finger_[i].value()));
      }
    }
    if (!space_finger_.is_thumb()) {
      throw ConfigError("space finger must be a thumb (4 or 5), got " +
                        std::to_string(space_finger_.value()));
    }
  }

  FingerId finger_of(char letter) const { return letter_to_finger_.at(letter - 'a'); }
  FingerId space_finger() const { return space_finger_; }
  const std::array<FingerId, 26>& letters() const { return letter_to_finger_; }

  /// Inverse image of f, in alphabetical order.
  std::string letters_of(FingerId f) const {
    std::string out;
    for (int i = 0; i < 26; ++i) {
      if (letter_to_finger_[i] == f) out.push_back(char('a' + i));
    }
    return out;
  }

  bool operator==(const KeyMap&) const = default;

 private:
  std::array<FingerId, 26> letter_to_finger_;
  FingerId space_finger_;
};

/// Standard touch-typing assignment on a QWERTY board.
inline KeyMap canonical_keymap(FingerId space_finger = FingerId{4}) {
  static constexpr std::array<std::pair<std::string_view, int>, 8> kRows = {{
      {"qaz", 0}, {"wsx", 1}, {"edc", 2}, {"rfvtgb", 3},
      {"yhnujm", 6}, {"ik", 7}, {"ol", 8}, {"p", 9},
  }};
  std::array<FingerId, 26> map{};
  for (const auto& [letters, finger] : kRows) {
    for (char c : letters) map[c - 'a'] = FingerId{finger};
  }
  return KeyMap(map, space_finger);
}

/// Augmented pools: canonical pools widened with observed alternative fingerings.
inline const std::array<std::string_view, 8>& augmented_pool_table() {
  static constexpr std::array<std::string_view, 8> kPools = {
      "aqz",        // 0
      "swx",        // 1
      "cdeswx",     // 2
      "bfgrtv",     // 3
      "bghjmntuy",  // 6
      "iklop",      // 7
      "lo",         // 8
      "p",          // 9
  };
  return kPools;
}

inline LetterPool letter_pool(const KeyMap& km, FingerId f, PoolMode mode) {
  const int idx = letter_finger_index(f);
  if (idx < 0) {
    throw DomainError("finger " + std::to_string(f.value()) + " has no letter pool");
  }
  std::string letters = km.letters_of(f);
  if (mode == PoolMode::kAugmented) {
    // For a non-canonical keymap keep containment of the canonical pool.
    letters += augmented_pool_table()[idx];
    std::sort(letters.begin(), letters.end());
    letters.erase(std::unique(letters.begin(), letters.end()), letters.end());
  }
  return LetterPool{f, std::move(letters), mode};
}

/// Fingers whose augmented pool contains letter.
inline std::vector<FingerId> augmented_owners(const KeyMap& km, char letter) {
  std::vector<FingerId> out;
  for (FingerId f : kLetterFingers) {
    if (letter_pool(km, f, PoolMode::kAugmented).contains(letter)) out.push_back(f);
  }
  return out;
}

inline std::string fold_case(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// Throws InvalidCharacter unless text is a-z words separated by single spaces.
inline void validate_text(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == ' ') {
      if (i == 0 || i + 1 == text.size()) {
        throw InvalidCharacter(i, "leading or trailing space");
      }
      if (text[i - 1] == ' ') throw InvalidCharacter(i, "repeated space");
    } else if (c < 'a' || c > 'z') {
      throw InvalidCharacter(i, std::string("character '") + c + "'");
    }
  }
}

inline FingerEvents fingers_for_text(std::string_view text, const KeyMap& km) {
  validate_text(text);
  FingerEvents events;
  events.reserve(text.size());
  for (char c : text) events.push_back(c == ' ' ? km.space_finger() : km.finger_of(c));
  return events;
}

/// Splits an event stream at thumb events into per-word finger sequences.
inline std::vector<FingerEvents> split_words(const FingerEvents& events) {
  std::vector<FingerEvents> words(1);
  for (FingerId f : events) {
    if (f.is_thumb()) {
      words.emplace_back();
    } else {
      words.back().push_back(f);
    }
  }
  if (words.size() == 1 && words.front().empty()) words.clear();
  return words;
}

// Text format: `letter<TAB>finger` per letter, then `SPACE<TAB>finger`.

inline void write_keymap(std::ostream& os, const KeyMap& km) {
  for (int i = 0; i < 26; ++i) {
    os << char('a' + i) << '\t' << km.letters()[i].value() << '\n';
  }
  os << "SPACE\t" << km.space_finger().value() << '\n';
}

/// Augmented relation as `letter<TAB>finger` pairs, one per owning finger.
inline void write_augmented_table(std::ostream& os, const KeyMap& km) {
  for (char c = 'a'; c <= 'z'; ++c) {
    for (FingerId f : augmented_owners(km, c)) os << c << '\t' << f.value() << '\n';
  }
  os << "SPACE\t" << km.space_finger().value() << '\n';
}

inline KeyMap read_keymap(std::istream& is) {
  std::array<FingerId, 26> map{};
  std::array<bool, 26> seen{};
  FingerId space{4};
  bool have_space = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(lineno, "expected key<TAB>finger");
    const std::string key = line.substr(0, tab);
    int finger = -1;
    std::istringstream num(line.substr(tab + 1));
    if (!(num >> finger) || !(num >> std::ws).eof()) {
      throw ParseError(lineno, "bad finger value");
    }
    if (key == "SPACE") {
      space = FingerId{finger};
      have_space = true;
    } else if (key.size() == 1 && key[0] >= 'a' && key[0] <= 'z') {
      if (seen[key[0] - 'a']) throw ParseError(lineno, "duplicate letter '" + key + "'");
      seen[key[0] - 'a'] = true;
      map[key[0] - 'a'] = FingerId{finger};
    } else {
      throw ParseError(lineno, "unknown key '" + key + "'");
    }
  }
  for (int i = 0; i < 26; ++i) {
    if (!seen[i]) throw ConfigError(std::string("keymap missing letter '") + char('a' + i) + "'");
  }
  if (!have_space) throw ConfigError("keymap missing SPACE entry");
  return KeyMap(map, space);
}

}  // namespace myotext
