#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "radjudge/errors.hpp"
#include "radjudge/report.hpp"
#include "radjudge/text.hpp"

namespace radjudge {

/// Clinical severity vocabulary. Unwanted comparisons to priors score the
/// same as not-actionable errors.
enum class SeverityLabel {
  NoError,
  InvalidComparison,
  NotActionable,
  ActionableNonurgent,
  Urgent,
  Emergent,
};

inline constexpr std::array<SeverityLabel, 6> kAllSeverities = {
    SeverityLabel::NoError,           SeverityLabel::InvalidComparison,
    SeverityLabel::NotActionable,     SeverityLabel::ActionableNonurgent,
    SeverityLabel::Urgent,            SeverityLabel::Emergent,
};

inline int numeric_score(SeverityLabel label) {
  switch (label) {
    case SeverityLabel::NoError: return 0;
    case SeverityLabel::InvalidComparison: return 1;
    case SeverityLabel::NotActionable: return 1;
    case SeverityLabel::ActionableNonurgent: return 2;
    case SeverityLabel::Urgent: return 3;
    case SeverityLabel::Emergent: return 4;
  }
  return 0;
}

inline std::string_view severity_name(SeverityLabel label) {
  switch (label) {
    case SeverityLabel::NoError: return "No error";
    case SeverityLabel::InvalidComparison: return "Invalid comparison";
    case SeverityLabel::NotActionable: return "Not actionable";
    case SeverityLabel::ActionableNonurgent: return "Actionable nonurgent error";
    case SeverityLabel::Urgent: return "Urgent error";
    case SeverityLabel::Emergent: return "Emergent error";
  }
  return "No error";
}

/// The six error categories a correction can be labeled with.
enum class ErrorCategory {
  FalsePrediction,
  OmissionOfFinding,
  IncorrectLocation,
  IncorrectSeverity,
  HallucinatedComparison,
  OmittedComparison,
};

inline constexpr std::array<ErrorCategory, 6> kAllCategories = {
    ErrorCategory::FalsePrediction,        ErrorCategory::OmissionOfFinding,
    ErrorCategory::IncorrectLocation,      ErrorCategory::IncorrectSeverity,
    ErrorCategory::HallucinatedComparison, ErrorCategory::OmittedComparison,
};

inline std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::FalsePrediction: return "False prediction of finding";
    case ErrorCategory::OmissionOfFinding: return "Omission of finding";
    case ErrorCategory::IncorrectLocation: return "Incorrect location/position of finding";
    case ErrorCategory::IncorrectSeverity: return "Incorrect severity of finding";
    case ErrorCategory::HallucinatedComparison:
      return "Mention of comparison that is not present in the reference impression";
    case ErrorCategory::OmittedComparison:
      return "Omission of comparison describing a change from a previous study";
  }
  return "False prediction of finding";
}

inline constexpr std::string_view kDeleteSentinel = "[delete]";

/// Matched case-insensitively after trimming.
inline bool is_delete_sentinel(std::string_view s) {
  return to_lower(trim(s)) == kDeleteSentinel;
}

class InvalidLineId : public Error {
 public:
  using Error::Error;
};

class ConflictingCorrections : public Error {
 public:
  using Error::Error;
};

/// One line-level edit: a delete or rewrite of an existing line, or an
/// insertion of a new line (no line id).
struct Correction {
  std::optional<int> line_id;  // nullopt marks an insertion
  bool is_delete = false;      // legal only together with a line id
  std::string text;            // replacement or inserted text; empty for deletes
  SeverityLabel severity = SeverityLabel::NoError;
  std::string comment;
  std::set<ErrorCategory> categories;

  bool is_insertion() const { return !line_id.has_value(); }

  static Correction rewrite(int line, std::string new_text, SeverityLabel severity,
                            std::string comment = {}, std::set<ErrorCategory> categories = {}) {
    if (trim_view(new_text).empty()) throw Error("rewrite text must be non-empty");
    return Correction{line, false, std::move(new_text), severity, std::move(comment),
                      std::move(categories)};
  }

  static Correction deletion(int line, SeverityLabel severity, std::string comment = {},
                             std::set<ErrorCategory> categories = {}) {
    return Correction{line, true, std::string{}, severity, std::move(comment),
                      std::move(categories)};
  }

  static Correction insertion(std::string new_text, SeverityLabel severity,
                              std::string comment = {}, std::set<ErrorCategory> categories = {}) {
    if (trim_view(new_text).empty()) throw Error("insertion text must be non-empty");
    return Correction{std::nullopt, false, std::move(new_text), severity, std::move(comment),
                      std::move(categories)};
  }

  bool operator==(const Correction&) const = default;
};

/// The ordered edit script for one report pair. At most one non-insertion
/// correction may target a given line id.
struct CorrectionSet {
  std::string pair_id;
  std::vector<Correction> corrections;

  bool empty() const { return corrections.empty(); }
  std::size_t size() const { return corrections.size(); }

  const Correction* for_line(int line_id) const {
    for (const Correction& c : corrections) {
      if (!c.is_insertion() && *c.line_id == line_id) return &c;
    }
    return nullptr;
  }

  std::vector<const Correction*> insertions() const {
    std::vector<const Correction*> out;
    for (const Correction& c : corrections) {
      if (c.is_insertion()) out.push_back(&c);
    }
    return out;
  }

  bool has_insertion() const {
    for (const Correction& c : corrections) {
      if (c.is_insertion()) return true;
    }
    return false;
  }

  bool operator==(const CorrectionSet&) const = default;
};

enum class CorrectionType { NoChange, Delete, Rewrite, Insert };

inline std::string_view correction_type_name(CorrectionType t) {
  switch (t) {
    case CorrectionType::NoChange: return "no_change";
    case CorrectionType::Delete: return "delete";
    case CorrectionType::Rewrite: return "rewrite";
    case CorrectionType::Insert: return "insert";
  }
  return "no_change";
}

/// Classifies one candidate line against an edit script. A textual correction
/// whose whitespace-normalized text equals the original line is a no-op.
inline CorrectionType classify_line(const SegmentedReport& candidate, int line_id,
                                    const CorrectionSet& set) {
  const Correction* c = set.for_line(line_id);
  if (c == nullptr) return CorrectionType::NoChange;
  if (c->is_delete) return CorrectionType::Delete;
  if (collapse_whitespace(c->text) !=
      collapse_whitespace(candidate.lines[static_cast<std::size_t>(line_id)])) {
    return CorrectionType::Rewrite;
  }
  return CorrectionType::NoChange;
}

/// Applies an edit script: deletes remove lines, rewrites replace them, and
/// insertions are appended after all original lines in script order. Ids of
/// the result are recomputed densely.
inline SegmentedReport apply_corrections(const SegmentedReport& candidate,
                                         const CorrectionSet& set) {
  std::vector<const Correction*> by_line(candidate.size(), nullptr);
  for (const Correction& c : set.corrections) {
    if (c.is_insertion()) continue;
    const int id = *c.line_id;
    if (id < 0 || static_cast<std::size_t>(id) >= candidate.size()) {
      throw InvalidLineId("correction targets line " + std::to_string(id) + " of a " +
                          std::to_string(candidate.size()) + "-line report");
    }
    if (by_line[static_cast<std::size_t>(id)] != nullptr) {
      throw ConflictingCorrections("two corrections target line " + std::to_string(id));
    }
    by_line[static_cast<std::size_t>(id)] = &c;
  }

  SegmentedReport out;
  out.section = candidate.section;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    const Correction* c = by_line[i];
    if (c == nullptr) {
      out.lines.push_back(candidate.lines[i]);
    } else if (c->is_delete) {
      continue;
    } else {
      std::string replacement = trim(c->text);
      if (collapse_whitespace(replacement) == collapse_whitespace(candidate.lines[i])) {
        out.lines.push_back(candidate.lines[i]);  // no-op rewrite
      } else {
        out.lines.push_back(std::move(replacement));
      }
    }
  }
  for (const Correction& c : set.corrections) {
    if (c.is_insertion()) out.lines.push_back(trim(c.text));
  }
  return out;
}

/// Radiologist annotations use the same edit semantics as judge corrections.
inline SegmentedReport gold_from_annotations(const SegmentedReport& candidate,
                                             const CorrectionSet& gold) {
  return apply_corrections(candidate, gold);
}

/// Concatenates every rewrite and insertion text in script order, joined by
/// single spaces. Deletes and no-op entries contribute nothing. When the
/// candidate is supplied, textual corrections equal to the original line are
/// treated as no-ops.
inline std::string concat_rewrites_and_inserts(const CorrectionSet& set,
                                               const SegmentedReport* candidate = nullptr) {
  std::string out;
  for (const Correction& c : set.corrections) {
    if (c.is_delete) continue;
    if (!c.is_insertion() && candidate != nullptr) {
      const int id = *c.line_id;
      if (id >= 0 && static_cast<std::size_t>(id) < candidate->size() &&
          collapse_whitespace(c.text) ==
              collapse_whitespace(candidate->lines[static_cast<std::size_t>(id)])) {
        continue;
      }
    }
    std::string piece = trim(c.text);
    if (piece.empty()) continue;
    if (!out.empty()) out += ' ';
    out += piece;
  }
  return out;
}

}  // namespace radjudge
