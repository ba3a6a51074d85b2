#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "radjudge/corrections.hpp"
#include "radjudge/csv.hpp"
#include "radjudge/errors.hpp"
#include "radjudge/parser.hpp"
#include "radjudge/report.hpp"

namespace radjudge {

class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Gold annotations failed to apply cleanly to their candidate report.
class ApplyCheckFailure : public Error {
 public:
  using Error::Error;
};

/// Externally computed per-pair scores accepted from a sidecar file. The
/// toolkit never computes these itself.
struct ExternalScores {
  std::optional<double> bertscore_concat;
  std::optional<double> radgraph_f1_base;
  std::optional<double> radgraph_f1_corrected;
  std::optional<double> radcliq_base;
  std::optional<double> radcliq_corrected;

  bool any() const {
    return bertscore_concat || radgraph_f1_base || radgraph_f1_corrected || radcliq_base ||
           radcliq_corrected;
  }
  bool operator==(const ExternalScores&) const = default;
};

/// One candidate report with one radiologist's corrections. The ground-truth
/// text is derived by applying the corrections unless an explicit override is
/// present (perturbed datasets carry one).
struct AnnotatedPair {
  std::string study_id;
  Section section = Section::Unspecified;
  std::string annotator_id;
  std::string candidate_text;
  CorrectionSet gold;
  std::optional<std::string> ground_truth_text;
  std::optional<std::string> original_candidate_text;
  bool unverified_paraphrase = false;
  ExternalScores external;

  std::string pair_key() const {
    return study_id + "/" + std::string(section_name(section)) + "/" + annotator_id;
  }

  SegmentedReport candidate() const { return segment_report(candidate_text, section); }
};

struct RexvalPair {
  std::string study_id;
  std::string candidate_text;
  std::string ground_truth_text;
  int radiologist_error_total = 0;
  bool heldout40 = false;
};

inline Section parse_section(const std::string& raw) {
  if (raw == "findings") return Section::Findings;
  if (raw == "impression") return Section::Impression;
  if (raw == "unspecified") return Section::Unspecified;
  throw SchemaError("unknown section: \"" + raw + "\"");
}

namespace detail {

inline nlohmann::json parse_jsonl_line(const std::string& line, const std::string& path,
                                       long line_no) {
  nlohmann::json doc = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw SchemaError(path + ":" + std::to_string(line_no) + ": not a JSON object");
  }
  return doc;
}

inline std::string require_string_field(const nlohmann::json& doc, const char* name,
                                        const std::string& path, long line_no) {
  auto it = doc.find(name);
  if (it == doc.end() || !it->is_string()) {
    throw SchemaError(path + ":" + std::to_string(line_no) + ": missing string field \"" + name +
                      "\"");
  }
  return it->get<std::string>();
}

inline void require_schema_version(const nlohmann::json& doc, const std::string& path,
                                   long line_no) {
  auto it = doc.find("schema_version");
  if (it == doc.end() || !it->is_number_integer() || it->get<int>() != 1) {
    throw SchemaError(path + ":" + std::to_string(line_no) +
                      ": unsupported or missing schema_version (expected 1)");
  }
}

inline std::optional<double> optional_number(const nlohmann::json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw SchemaError(std::string("field \"") + name + "\" must be a number");
  return it->get<double>();
}

}  // namespace detail

/// Loads and validates a JSON-lines dataset of annotated pairs. Each gold
/// script is parsed against its candidate and pre-checked to apply cleanly;
/// failures name the offending study.
inline std::vector<AnnotatedPair> load_annotated_pairs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset: " + path.string());

  std::vector<AnnotatedPair> pairs;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_view(line).empty()) continue;
    const nlohmann::json doc = detail::parse_jsonl_line(line, path.string(), line_no);
    detail::require_schema_version(doc, path.string(), line_no);

    AnnotatedPair pair;
    pair.study_id = detail::require_string_field(doc, "study_id", path.string(), line_no);
    pair.section =
        parse_section(detail::require_string_field(doc, "section", path.string(), line_no));
    pair.annotator_id = detail::require_string_field(doc, "annotator_id", path.string(), line_no);
    pair.candidate_text =
        detail::require_string_field(doc, "candidate_text", path.string(), line_no);
    if (trim_view(pair.candidate_text).empty()) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                        ": candidate_text is empty");
    }

    auto corrections_it = doc.find("gold_corrections");
    if (corrections_it == doc.end() || !corrections_it->is_object()) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                        ": missing object field \"gold_corrections\"");
    }

    if (auto it = doc.find("ground_truth_text"); it != doc.end() && it->is_string()) {
      pair.ground_truth_text = it->get<std::string>();
    }
    if (auto it = doc.find("original_candidate_text"); it != doc.end() && it->is_string()) {
      pair.original_candidate_text = it->get<std::string>();
    }
    if (auto it = doc.find("unverified_paraphrase"); it != doc.end() && it->is_boolean()) {
      pair.unverified_paraphrase = it->get<bool>();
    }
    if (auto it = doc.find("external_scores"); it != doc.end() && it->is_object()) {
      pair.external.bertscore_concat = detail::optional_number(*it, "bertscore_concat");
      pair.external.radgraph_f1_base = detail::optional_number(*it, "radgraph_f1_base");
      pair.external.radgraph_f1_corrected = detail::optional_number(*it, "radgraph_f1_corrected");
      pair.external.radcliq_base = detail::optional_number(*it, "radcliq_base");
      pair.external.radcliq_corrected = detail::optional_number(*it, "radcliq_corrected");
    }

    const SegmentedReport candidate = segment_report(pair.candidate_text, pair.section);
    try {
      pair.gold = parse_corrections(corrections_it->dump(), candidate).set;
      pair.gold.pair_id = pair.pair_key();
      apply_corrections(candidate, pair.gold);  // pre-check
    } catch (const LineIdOutOfRange& e) {
      throw ApplyCheckFailure("study " + pair.study_id + ": " + e.what());
    } catch (const InvalidLineId& e) {
      throw ApplyCheckFailure("study " + pair.study_id + ": " + e.what());
    } catch (const ConflictingCorrections& e) {
      throw ApplyCheckFailure("study " + pair.study_id + ": " + e.what());
    } catch (const ParseError& e) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

inline nlohmann::ordered_json annotated_pair_to_json(const AnnotatedPair& pair) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["study_id"] = pair.study_id;
  doc["section"] = std::string(section_name(pair.section));
  doc["annotator_id"] = pair.annotator_id;
  doc["candidate_text"] = pair.candidate_text;
  doc["gold_corrections"] = corrections_to_json(pair.gold);
  if (pair.ground_truth_text) doc["ground_truth_text"] = *pair.ground_truth_text;
  if (pair.original_candidate_text) doc["original_candidate_text"] = *pair.original_candidate_text;
  if (pair.unverified_paraphrase) doc["unverified_paraphrase"] = true;
  if (pair.external.any()) {
    nlohmann::ordered_json scores;
    auto put = [&scores](const char* name, const std::optional<double>& value) {
      if (value) scores[name] = *value;
    };
    put("bertscore_concat", pair.external.bertscore_concat);
    put("radgraph_f1_base", pair.external.radgraph_f1_base);
    put("radgraph_f1_corrected", pair.external.radgraph_f1_corrected);
    put("radcliq_base", pair.external.radcliq_base);
    put("radcliq_corrected", pair.external.radcliq_corrected);
    doc["external_scores"] = std::move(scores);
  }
  return doc;
}

inline void write_annotated_pairs(const std::filesystem::path& path,
                                  const std::vector<AnnotatedPair>& pairs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write dataset: " + path.string());
  for (const AnnotatedPair& pair : pairs) {
    out << annotated_pair_to_json(pair).dump() << '\n';
  }
}

inline std::vector<RexvalPair> load_rexval_pairs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset: " + path.string());

  std::vector<RexvalPair> pairs;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_view(line).empty()) continue;
    const nlohmann::json doc = detail::parse_jsonl_line(line, path.string(), line_no);
    detail::require_schema_version(doc, path.string(), line_no);

    RexvalPair pair;
    pair.study_id = detail::require_string_field(doc, "study_id", path.string(), line_no);
    pair.candidate_text =
        detail::require_string_field(doc, "candidate_text", path.string(), line_no);
    pair.ground_truth_text =
        detail::require_string_field(doc, "ground_truth_text", path.string(), line_no);
    auto total = doc.find("radiologist_error_total");
    if (total == doc.end() || !total->is_number_integer() || total->get<int>() < 0) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                        ": radiologist_error_total must be a non-negative integer");
    }
    pair.radiologist_error_total = total->get<int>();
    if (auto it = doc.find("heldout40"); it != doc.end() && it->is_boolean()) {
      pair.heldout40 = it->get<bool>();
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

inline void write_rexval_pairs(const std::filesystem::path& path,
                               const std::vector<RexvalPair>& pairs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write dataset: " + path.string());
  for (const RexvalPair& pair : pairs) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    doc["study_id"] = pair.study_id;
    doc["candidate_text"] = pair.candidate_text;
    doc["ground_truth_text"] = pair.ground_truth_text;
    doc["radiologist_error_total"] = pair.radiologist_error_total;
    doc["heldout40"] = pair.heldout40;
    out << doc.dump() << '\n';
  }
}

/// Sidecar CSV keyed by study id; recognized columns are merged into every
/// pair of that study.
inline std::map<std::string, ExternalScores> load_external_scores_csv(
    const std::filesystem::path& path) {
  const auto rows = read_csv_file(path.string());
  if (rows.empty()) throw SchemaError("external scores CSV is empty: " + path.string());
  const auto& header = rows.front();
  auto column = [&header](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto study_col = column("study_id");
  if (!study_col) throw SchemaError("external scores CSV needs a study_id column");

  const auto bert = column("bertscore_concat");
  const auto rg_base = column("radgraph_f1_base");
  const auto rg_corr = column("radgraph_f1_corrected");
  const auto cliq_base = column("radcliq_base");
  const auto cliq_corr = column("radcliq_corrected");

  std::map<std::string, ExternalScores> by_study;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() <= *study_col) continue;
    auto cell = [&row](const std::optional<std::size_t>& col) -> std::optional<double> {
      if (!col || *col >= row.size() || trim_view(row[*col]).empty()) return std::nullopt;
      return std::stod(row[*col]);
    };
    ExternalScores scores;
    scores.bertscore_concat = cell(bert);
    scores.radgraph_f1_base = cell(rg_base);
    scores.radgraph_f1_corrected = cell(rg_corr);
    scores.radcliq_base = cell(cliq_base);
    scores.radcliq_corrected = cell(cliq_corr);
    by_study[row[*study_col]] = scores;
  }
  return by_study;
}

inline void merge_external_scores(std::vector<AnnotatedPair>& pairs,
                                  const std::map<std::string, ExternalScores>& by_study) {
  for (AnnotatedPair& pair : pairs) {
    auto it = by_study.find(pair.study_id);
    if (it != by_study.end()) pair.external = it->second;
  }
}

}  // namespace radjudge
