#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "radjudge/corrections.hpp"
#include "radjudge/errors.hpp"
#include "radjudge/report.hpp"
#include "radjudge/rng.hpp"
#include "radjudge/text.hpp"

namespace radjudge {

class MismatchedCandidate : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// BLEU
// ---------------------------------------------------------------------------

/// Lowercases, separates terminal punctuation (. ? !) into its own tokens,
/// and splits on whitespace. Interior periods (decimals) stay attached.
inline std::vector<std::string> bleu_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  const std::string lowered = to_lower(text);
  std::size_t i = 0;
  while (i < lowered.size()) {
    while (i < lowered.size() && is_space(lowered[i])) ++i;
    std::size_t start = i;
    while (i < lowered.size() && !is_space(lowered[i])) ++i;
    if (i == start) continue;
    std::string_view chunk(lowered.data() + start, i - start);
    std::size_t end = chunk.size();
    while (end > 0 && (chunk[end - 1] == '.' || chunk[end - 1] == '?' || chunk[end - 1] == '!')) {
      --end;
    }
    if (end > 0) tokens.emplace_back(chunk.substr(0, end));
    for (std::size_t p = end; p < chunk.size(); ++p) tokens.emplace_back(1, chunk[p]);
  }
  return tokens;
}

namespace detail {

inline std::unordered_map<std::string, long> ngram_counts(const std::vector<std::string>& tokens,
                                                          std::size_t n) {
  std::unordered_map<std::string, long> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t j = 0; j < n; ++j) {
      if (j > 0) key += '\x1f';
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace detail

/// BLEU with clipped n-gram precisions for n = 1..max_n and the standard
/// brevity penalty. A precision with zero matches gets an epsilon numerator
/// instead of zeroing the whole score, so one-token corrections still
/// average meaningfully. Empty candidates score 0.
inline double bleu(std::string_view candidate, std::string_view reference, int max_n) {
  constexpr double kEpsilon = 1e-9;
  const std::vector<std::string> cand = bleu_tokenize(candidate);
  const std::vector<std::string> ref = bleu_tokenize(reference);
  if (cand.empty()) return 0.0;

  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto cand_counts = detail::ngram_counts(cand, static_cast<std::size_t>(n));
    const auto ref_counts = detail::ngram_counts(ref, static_cast<std::size_t>(n));
    long total = 0;
    long matched = 0;
    for (const auto& [gram, count] : cand_counts) {
      total += count;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    const double numerator = matched > 0 ? static_cast<double>(matched) : kEpsilon;
    const double denominator = static_cast<double>(std::max<long>(total, 1));
    log_sum += std::log(numerator / denominator);
  }

  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  return brevity * std::exp(log_sum / max_n);
}

// ---------------------------------------------------------------------------
// Correction-type confusion
// ---------------------------------------------------------------------------

/// Line-level agreement for NoChange/Delete/Rewrite plus the report-level
/// insertion metrics. Cells with no observations report no accuracy.
struct CorrectionTypeReport {
  // line_confusion[gold][predicted], indexed NoChange=0, Delete=1, Rewrite=2.
  std::array<std::array<long, 3>, 3> line_confusion{};
  long insert_reports_gold = 0;     // reports where the gold script inserts
  long insert_reports_hit = 0;      // ... and the prediction inserts too
  long no_insert_reports_gold = 0;  // reports with no gold insertion
  long no_insert_reports_hit = 0;   // ... and no predicted insertion either

  void add_line(CorrectionType gold, CorrectionType predicted) {
    ++line_confusion[static_cast<std::size_t>(gold)][static_cast<std::size_t>(predicted)];
  }

  void add_report(bool gold_inserts, bool predicted_inserts) {
    if (gold_inserts) {
      ++insert_reports_gold;
      if (predicted_inserts) ++insert_reports_hit;
    } else {
      ++no_insert_reports_gold;
      if (!predicted_inserts) ++no_insert_reports_hit;
    }
  }

  long gold_line_total(CorrectionType gold) const {
    long total = 0;
    for (long cell : line_confusion[static_cast<std::size_t>(gold)]) total += cell;
    return total;
  }

  std::optional<double> line_accuracy(CorrectionType gold) const {
    const long total = gold_line_total(gold);
    if (total == 0) return std::nullopt;
    const auto g = static_cast<std::size_t>(gold);
    return static_cast<double>(line_confusion[g][g]) / static_cast<double>(total);
  }

  std::optional<double> no_change_accuracy() const {
    return line_accuracy(CorrectionType::NoChange);
  }
  std::optional<double> delete_accuracy() const { return line_accuracy(CorrectionType::Delete); }
  std::optional<double> rewrite_accuracy() const { return line_accuracy(CorrectionType::Rewrite); }

  std::optional<double> insert_recall() const {
    if (insert_reports_gold == 0) return std::nullopt;
    return static_cast<double>(insert_reports_hit) / static_cast<double>(insert_reports_gold);
  }

  std::optional<double> no_insert_precision() const {
    if (no_insert_reports_gold == 0) return std::nullopt;
    return static_cast<double>(no_insert_reports_hit) /
           static_cast<double>(no_insert_reports_gold);
  }
};

struct ClassifiedPair {
  const SegmentedReport* candidate;
  const CorrectionSet* gold;
  const CorrectionSet* predicted;
};

/// Per-line agreement over NoChange/Delete/Rewrite and report-level insertion
/// recall / no-insert precision, following the gold classification.
inline CorrectionTypeReport correction_type_metrics(const std::vector<ClassifiedPair>& pairs) {
  CorrectionTypeReport report;
  for (const ClassifiedPair& pair : pairs) {
    if (!pair.gold->pair_id.empty() && !pair.predicted->pair_id.empty() &&
        pair.gold->pair_id != pair.predicted->pair_id) {
      throw MismatchedCandidate("gold set \"" + pair.gold->pair_id +
                                "\" compared against predicted set \"" + pair.predicted->pair_id +
                                "\"");
    }
    for (const CorrectionSet* set : {pair.gold, pair.predicted}) {
      for (const Correction& c : set->corrections) {
        if (c.is_insertion()) continue;
        if (*c.line_id < 0 || static_cast<std::size_t>(*c.line_id) >= pair.candidate->size()) {
          throw MismatchedCandidate("correction targets line " + std::to_string(*c.line_id) +
                                    " outside the supplied candidate");
        }
      }
    }
    for (std::size_t line = 0; line < pair.candidate->size(); ++line) {
      report.add_line(classify_line(*pair.candidate, static_cast<int>(line), *pair.gold),
                      classify_line(*pair.candidate, static_cast<int>(line), *pair.predicted));
    }
    report.add_report(pair.gold->has_insertion(), pair.predicted->has_insertion());
  }
  return report;
}

// ---------------------------------------------------------------------------
// Severity scoring
// ---------------------------------------------------------------------------

enum class ScoreMode { Max, Sum };

/// Report-level severity: the maximum or sum of the numeric severities of all
/// corrections. An empty script scores 0.
inline int severity_report_score(const CorrectionSet& set, ScoreMode mode) {
  int score = 0;
  for (const Correction& c : set.corrections) {
    const int s = numeric_score(c.severity);
    score = mode == ScoreMode::Max ? std::max(score, s) : score + s;
  }
  return score;
}

/// MAE and the signed-difference histogram (predicted minus gold), with
/// counts divided by the number of reports.
struct SeverityReport {
  double mae = 0.0;
  std::array<double, 9> histogram{};  // bins for differences -4 .. +4
  long n_pairs = 0;
  long n_reports = 0;

  double bin(int signed_difference) const {
    return histogram[static_cast<std::size_t>(signed_difference + 4)];
  }
};

inline SeverityReport severity_alignment(std::span<const std::pair<int, int>> gold_predicted,
                                         long n_reports) {
  SeverityReport report;
  report.n_pairs = static_cast<long>(gold_predicted.size());
  report.n_reports = n_reports;
  if (n_reports <= 0) throw Error("severity_alignment needs a positive report count");
  double abs_sum = 0.0;
  for (const auto& [gold, predicted] : gold_predicted) {
    const int diff = predicted - gold;
    if (diff < -4 || diff > 4) {
      throw Error("severity difference outside [-4, 4]: " + std::to_string(diff));
    }
    abs_sum += std::abs(diff);
    report.histogram[static_cast<std::size_t>(diff + 4)] += 1.0;
  }
  for (double& bin : report.histogram) bin /= static_cast<double>(n_reports);
  report.mae = gold_predicted.empty() ? 0.0 : abs_sum / static_cast<double>(gold_predicted.size());
  return report;
}

// ---------------------------------------------------------------------------
// Error-category precision / recall
// ---------------------------------------------------------------------------

/// Report-level category presence comparison. Ratios with an empty
/// denominator are reported as absent rather than zero.
struct CategoryPRReport {
  std::array<long, 6> true_positive{};
  std::array<long, 6> false_positive{};
  std::array<long, 6> false_negative{};

  std::optional<double> precision(ErrorCategory c) const {
    const auto i = static_cast<std::size_t>(c);
    const long denom = true_positive[i] + false_positive[i];
    if (denom == 0) return std::nullopt;
    return static_cast<double>(true_positive[i]) / static_cast<double>(denom);
  }

  std::optional<double> recall(ErrorCategory c) const {
    const auto i = static_cast<std::size_t>(c);
    const long denom = true_positive[i] + false_negative[i];
    if (denom == 0) return std::nullopt;
    return static_cast<double>(true_positive[i]) / static_cast<double>(denom);
  }
};

inline CategoryPRReport category_precision_recall(
    std::span<const std::pair<std::set<ErrorCategory>, std::set<ErrorCategory>>> gold_predicted) {
  CategoryPRReport report;
  for (const auto& [gold, predicted] : gold_predicted) {
    for (ErrorCategory c : kAllCategories) {
      const auto i = static_cast<std::size_t>(c);
      const bool in_gold = gold.count(c) > 0;
      const bool in_predicted = predicted.count(c) > 0;
      if (in_gold && in_predicted) ++report.true_positive[i];
      if (!in_gold && in_predicted) ++report.false_positive[i];
      if (in_gold && !in_predicted) ++report.false_negative[i];
    }
  }
  return report;
}

/// Union of the categories attached to any correction in the script.
inline std::set<ErrorCategory> categories_present(const CorrectionSet& set) {
  std::set<ErrorCategory> present;
  for (const Correction& c : set.corrections) {
    present.insert(c.categories.begin(), c.categories.end());
  }
  return present;
}

// ---------------------------------------------------------------------------
// Inter-rater baseline
// ---------------------------------------------------------------------------

struct InterRaterResult {
  std::vector<std::pair<int, int>> score_pairs;  // (gold, candidate) max-mode scores
  long n_reports_used = 0;
  std::vector<std::string> warnings;
};

/// For each report with at least two annotators, a seeded draw picks one
/// annotator as the candidate and every other annotator contributes one
/// (gold, candidate) score pair. Reports with fewer annotators are skipped
/// with a warning.
inline InterRaterResult inter_rater_baseline(
    const std::vector<std::vector<CorrectionSet>>& annotations_per_report, std::uint64_t seed) {
  InterRaterResult result;
  SeededRng rng(seed);
  for (std::size_t r = 0; r < annotations_per_report.size(); ++r) {
    const auto& annotators = annotations_per_report[r];
    if (annotators.size() < 2) {
      result.warnings.push_back("report " + std::to_string(r) +
                                " skipped: needs at least 2 annotators, has " +
                                std::to_string(annotators.size()));
      continue;
    }
    const std::size_t chosen = rng.bounded(annotators.size());
    const int candidate_score = severity_report_score(annotators[chosen], ScoreMode::Max);
    for (std::size_t a = 0; a < annotators.size(); ++a) {
      if (a == chosen) continue;
      result.score_pairs.emplace_back(severity_report_score(annotators[a], ScoreMode::Max),
                                      candidate_score);
    }
    ++result.n_reports_used;
  }
  return result;
}

}  // namespace radjudge
