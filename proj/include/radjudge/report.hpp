#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "radjudge/errors.hpp"
#include "radjudge/text.hpp"

namespace radjudge {

enum class Section { Findings, Impression, Unspecified };

inline std::string_view section_name(Section s) {
  switch (s) {
    case Section::Findings: return "findings";
    case Section::Impression: return "impression";
    case Section::Unspecified: return "unspecified";
  }
  return "unspecified";
}

class EmptyReport : public Error {
 public:
  using Error::Error;
};

/// One report section as an ordered list of trimmed, non-empty text segments.
/// Line ids are the 0-based positions in `lines`.
struct SegmentedReport {
  std::vector<std::string> lines;
  Section section = Section::Unspecified;

  std::size_t size() const { return lines.size(); }
  bool operator==(const SegmentedReport&) const = default;
};

inline bool ends_with_terminal_punct(std::string_view s) {
  if (s.empty()) return false;
  char c = s.back();
  return c == '.' || c == '?' || c == '!';
}

/// Splits report text on ". " where the period is not preceded by a digit and
/// at least one character follows the space. The delimiter is consumed;
/// segments are trimmed and empty segments dropped. Equivalent to the scanner
/// form of a lookaround split, so "2.2 cm" style decimals never break a line.
inline SegmentedReport segment_report(std::string_view text,
                                      Section section = Section::Unspecified) {
  if (trim_view(text).empty()) throw EmptyReport("report text is empty");
  SegmentedReport report;
  report.section = section;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    std::string segment = trim(text.substr(start, end - start));
    if (!segment.empty()) report.lines.push_back(std::move(segment));
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const bool delimiter =
        text[i] == '.' && i + 2 < text.size() && text[i + 1] == ' ' &&
        (i == 0 || !std::isdigit(static_cast<unsigned char>(text[i - 1])));
    if (delimiter) {
      flush(i);
      start = i + 2;
      i += 2;
    } else {
      ++i;
    }
  }
  flush(text.size());
  return report;
}

/// Joins segments back into report text, re-inserting the consumed ". "
/// delimiter. A segment that already ends in terminal punctuation gets only
/// the space; the final segment is emitted verbatim.
inline std::string render_report(const SegmentedReport& report) {
  std::string out;
  for (std::size_t i = 0; i < report.lines.size(); ++i) {
    out += report.lines[i];
    if (i + 1 < report.lines.size()) {
      out += ends_with_terminal_punct(report.lines[i]) ? " " : ". ";
    }
  }
  return out;
}

/// Renders "[id] text" lines joined by newlines, the display form used when
/// prompting the judge.
inline std::string number_lines(const SegmentedReport& report) {
  std::string out;
  for (std::size_t i = 0; i < report.lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += '[';
    out += std::to_string(i);
    out += "] ";
    out += report.lines[i];
  }
  return out;
}

}  // namespace radjudge
