#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "radjudge/corrections.hpp"
#include "radjudge/errors.hpp"
#include "radjudge/report.hpp"
#include "radjudge/text.hpp"

namespace radjudge {

/// Retryable parse failures. The gateway re-prompts on any of these.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// No parsable top-level JSON object in the completion.
class MalformedJson : public ParseError {
 public:
  using ParseError::ParseError;
};

/// The JSON parsed but violates the corrections contract (bad key, missing or
/// mistyped field, unknown severity).
class SchemaViolation : public ParseError {
 public:
  using ParseError::ParseError;
};

class UnknownSeverity : public SchemaViolation {
 public:
  using SchemaViolation::SchemaViolation;
};

/// A correction targets a line id outside the candidate report.
class LineIdOutOfRange : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Lowercase alphanumeric key used for case- and punctuation-insensitive
/// vocabulary matching.
inline std::string vocab_key(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

/// Maps a raw severity string into the vocabulary. Accepts the label with or
/// without a trailing "error" and ignores case and punctuation.
inline SeverityLabel validate_severity(std::string_view raw) {
  const std::string key = vocab_key(raw);
  if (key == "noerror") return SeverityLabel::NoError;
  if (key == "invalidcomparison" || key == "invalidcomparisonerror")
    return SeverityLabel::InvalidComparison;
  if (key == "notactionable" || key == "notactionableerror") return SeverityLabel::NotActionable;
  if (key == "actionablenonurgent" || key == "actionablenonurgenterror")
    return SeverityLabel::ActionableNonurgent;
  if (key == "urgent" || key == "urgenterror") return SeverityLabel::Urgent;
  if (key == "emergent" || key == "emergenterror") return SeverityLabel::Emergent;
  throw UnknownSeverity("unknown clinical severity: \"" + std::string(raw) + "\"");
}

/// Returns nullopt for strings outside the six-category vocabulary; callers
/// drop those with a warning. A leading "N." list number is tolerated.
inline std::optional<ErrorCategory> match_category(std::string_view raw) {
  std::string_view t = trim_view(raw);
  if (!t.empty() && std::isdigit(static_cast<unsigned char>(t.front()))) {
    std::size_t i = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    if (i < t.size() && (t[i] == '.' || t[i] == ')')) t.remove_prefix(i + 1);
  }
  const std::string key = vocab_key(t);
  for (ErrorCategory c : kAllCategories) {
    if (key == vocab_key(category_name(c))) return c;
  }
  return std::nullopt;
}

namespace detail {

/// Finds the first balanced {...} in the text that parses as JSON. Tolerates
/// code fences and surrounding prose, which sit outside the braces.
inline std::optional<nlohmann::json> extract_first_json_object(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t j = i; j < text.size(); ++j) {
      const char c = text[j];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          auto parsed = nlohmann::json::parse(text.substr(i, j - i + 1), nullptr,
                                              /*allow_exceptions=*/false);
          if (!parsed.is_discarded() && parsed.is_object()) return parsed;
          break;  // balanced but unparsable; try the next opening brace
        }
      }
    }
  }
  return std::nullopt;
}

inline const nlohmann::json& require_field(const nlohmann::json& entry, const char* name) {
  auto it = entry.find(name);
  if (it == entry.end()) {
    throw SchemaViolation(std::string("correction entry is missing \"") + name + "\"");
  }
  return *it;
}

inline std::string require_string(const nlohmann::json& entry, const char* name) {
  const nlohmann::json& value = require_field(entry, name);
  if (!value.is_string()) {
    throw SchemaViolation(std::string("field \"") + name + "\" must be a string");
  }
  return value.get<std::string>();
}

inline Correction entry_to_correction(const nlohmann::json& entry, std::optional<int> line_id,
                                      std::vector<std::string>& warnings) {
  if (!entry.is_object()) throw SchemaViolation("correction entry must be a JSON object");

  std::string corrections = trim(require_string(entry, "corrections"));
  std::string severity_raw = trim(require_string(entry, "clinical severity"));
  // Known judge failure: the corrections and severity values swapped, visible
  // as a delete sentinel in the severity slot.
  if (is_delete_sentinel(severity_raw)) std::swap(corrections, severity_raw);

  std::string comment;
  if (auto it = entry.find("comments"); it != entry.end() && it->is_string()) {
    comment = it->get<std::string>();
  }

  std::set<ErrorCategory> categories;
  if (auto it = entry.find("error category"); it != entry.end()) {
    std::vector<std::string> raw_categories;
    if (it->is_array()) {
      for (const auto& item : *it) {
        if (!item.is_string()) throw SchemaViolation("error category entries must be strings");
        raw_categories.push_back(item.get<std::string>());
      }
    } else if (it->is_string()) {
      raw_categories.push_back(it->get<std::string>());
    } else {
      throw SchemaViolation("\"error category\" must be a list of strings");
    }
    for (const std::string& raw : raw_categories) {
      if (auto matched = match_category(raw)) {
        categories.insert(*matched);
      } else {
        warnings.push_back("dropped unknown error category: \"" + raw + "\"");
      }
    }
  }

  const SeverityLabel severity = validate_severity(severity_raw);
  if (is_delete_sentinel(corrections)) {
    if (!line_id.has_value()) {
      throw SchemaViolation("an insertion entry cannot carry the delete sentinel");
    }
    return Correction::deletion(*line_id, severity, std::move(comment), std::move(categories));
  }
  if (trim_view(corrections).empty()) {
    throw SchemaViolation("correction text is empty");
  }
  if (line_id.has_value()) {
    return Correction::rewrite(*line_id, std::move(corrections), severity, std::move(comment),
                               std::move(categories));
  }
  return Correction::insertion(std::move(corrections), severity, std::move(comment),
                               std::move(categories));
}

}  // namespace detail

struct ParsedCorrections {
  CorrectionSet set;
  std::vector<std::string> warnings;
};

/// Parses a judge completion into an edit script for the given candidate.
/// Integer keys address candidate lines; "None" holds the insertion entry, or
/// a list of them. Textual corrections identical to the original line are
/// dropped as no-ops. Throws ParseError subclasses, all of which are
/// retryable.
inline ParsedCorrections parse_corrections(std::string_view completion,
                                           const SegmentedReport& candidate) {
  auto object = detail::extract_first_json_object(completion);
  if (!object.has_value()) {
    throw MalformedJson("completion contains no parsable JSON object");
  }

  std::vector<std::pair<long, const nlohmann::json*>> numbered;
  const nlohmann::json* insertion_entry = nullptr;
  for (auto it = object->begin(); it != object->end(); ++it) {
    const std::string key = trim(it.key());
    if (to_lower(key) == "none") {
      insertion_entry = &it.value();
      continue;
    }
    char* end = nullptr;
    const long id = std::strtol(key.c_str(), &end, 10);
    if (key.empty() || end == nullptr || *end != '\0') {
      throw SchemaViolation("object key is neither a line id nor \"None\": \"" + key + "\"");
    }
    numbered.emplace_back(id, &it.value());
  }
  std::stable_sort(numbered.begin(), numbered.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  ParsedCorrections out;
  for (const auto& [id, entry] : numbered) {
    if (id < 0 || static_cast<std::size_t>(id) >= candidate.size()) {
      throw LineIdOutOfRange("line id " + std::to_string(id) + " outside a " +
                             std::to_string(candidate.size()) + "-line candidate");
    }
    Correction c = detail::entry_to_correction(*entry, static_cast<int>(id), out.warnings);
    if (!c.is_delete &&
        collapse_whitespace(c.text) ==
            collapse_whitespace(candidate.lines[static_cast<std::size_t>(id)])) {
      continue;  // no-op rewrite
    }
    out.set.corrections.push_back(std::move(c));
  }

  if (insertion_entry != nullptr) {
    if (insertion_entry->is_array()) {
      for (const auto& item : *insertion_entry) {
        out.set.corrections.push_back(
            detail::entry_to_correction(item, std::nullopt, out.warnings));
      }
    } else {
      out.set.corrections.push_back(
          detail::entry_to_correction(*insertion_entry, std::nullopt, out.warnings));
    }
  }
  return out;
}

/// Canonical serialized form: one JSON object, line-id keys sorted
/// numerically, the "None" insertion slot last (a list when there are
/// multiple insertions).
inline nlohmann::ordered_json corrections_to_json(const CorrectionSet& set) {
  auto entry_json = [](const Correction& c) {
    nlohmann::ordered_json entry;
    entry["corrections"] = c.is_delete ? std::string(kDeleteSentinel) : c.text;
    entry["clinical severity"] = std::string(severity_name(c.severity));
    entry["comments"] = c.comment;
    auto categories = nlohmann::ordered_json::array();
    for (ErrorCategory cat : c.categories) categories.push_back(std::string(category_name(cat)));
    entry["error category"] = std::move(categories);
    return entry;
  };

  std::vector<const Correction*> line_targeted;
  std::vector<const Correction*> insertions;
  for (const Correction& c : set.corrections) {
    (c.is_insertion() ? insertions : line_targeted).push_back(&c);
  }
  std::sort(line_targeted.begin(), line_targeted.end(),
            [](const Correction* a, const Correction* b) { return *a->line_id < *b->line_id; });
  for (std::size_t i = 1; i < line_targeted.size(); ++i) {
    if (*line_targeted[i]->line_id == *line_targeted[i - 1]->line_id) {
      throw ConflictingCorrections("two corrections target line " +
                                   std::to_string(*line_targeted[i]->line_id));
    }
  }

  nlohmann::ordered_json object = nlohmann::ordered_json::object();
  for (const Correction* c : line_targeted) {
    object[std::to_string(*c->line_id)] = entry_json(*c);
  }
  if (insertions.size() == 1) {
    object["None"] = entry_json(*insertions.front());
  } else if (insertions.size() > 1) {
    auto list = nlohmann::ordered_json::array();
    for (const Correction* c : insertions) list.push_back(entry_json(*c));
    object["None"] = std::move(list);
  }
  return object;
}

inline std::string serialize_corrections(const CorrectionSet& set, int indent = 4) {
  return corrections_to_json(set).dump(indent);
}

}  // namespace radjudge
