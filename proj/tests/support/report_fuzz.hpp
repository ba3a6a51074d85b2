#pragma once

#include <cstddef>
#include <string>

#include "radjudge/rng.hpp"

namespace radjudge::testing {

/// Report-like text generator: sentences of plain words and decimal
/// measurements joined by ". ", with optional final period, stray interior
/// whitespace, and newlines. Sentences never end in terminal punctuation,
/// matching how report prose actually reads.
inline std::string random_word(radjudge::SeededRng& rng) {
  static const char* kWords[] = {
      "lungs",  "clear",    "heart",       "size",     "normal",   "effusion", "pleural",
      "right",  "left",     "lower",       "lobe",     "tube",     "carina",   "mild",
      "stable", "moderate", "atelectasis", "opacity",  "edema",    "no",       "is",
      "are",    "the",      "there",       "with",     "of",       "unchanged"};
  return kWords[rng.bounded(std::size(kWords))];
}

inline std::string random_decimal(radjudge::SeededRng& rng) {
  return std::to_string(1 + rng.bounded(9)) + "." + std::to_string(rng.bounded(10)) + " cm";
}

inline std::string random_sentence(radjudge::SeededRng& rng) {
  const std::size_t words = 2 + rng.bounded(6);
  std::string sentence;
  for (std::size_t i = 0; i < words; ++i) {
    if (!sentence.empty()) {
      const std::size_t gap = rng.bounded(12);
      sentence += gap == 0 ? "  " : (gap == 1 ? "\n" : " ");
    }
    sentence += rng.bounded(8) == 0 ? random_decimal(rng) : random_word(rng);
  }
  return sentence;
}

inline std::string random_report(radjudge::SeededRng& rng) {
  const std::size_t sentences = 1 + rng.bounded(5);
  std::string report;
  for (std::size_t i = 0; i < sentences; ++i) {
    if (i > 0) report += ". ";
    report += random_sentence(rng);
  }
  if (rng.bounded(2) == 0) report += ".";
  if (rng.bounded(4) == 0) report = "  " + report;
  if (rng.bounded(4) == 0) report += " ";
  return report;
}

}  // namespace radjudge::testing
