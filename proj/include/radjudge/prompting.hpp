#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "radjudge/errors.hpp"
#include "radjudge/hash.hpp"
#include "radjudge/report.hpp"
#include "radjudge/text.hpp"

namespace radjudge {

class TemplateError : public Error {
 public:
  using Error::Error;
};

struct ChatMessage {
  std::string role;
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

using ChatMessages = std::vector<ChatMessage>;

enum class TemplateVariant { FewShot, ZeroShot };

inline std::string_view template_variant_name(TemplateVariant v) {
  return v == TemplateVariant::FewShot ? "fewshot" : "zeroshot";
}

/// Whether the rendered prompt is sent as one user message or split into a
/// system message (instructions + format) and a user message (shots + query).
enum class MessageMode { SingleUser, SystemUser };

struct ShotExample {
  std::string generated_text;     // numbered candidate, "[0] ..." lines
  std::string ground_truth_text;  // plain text
  std::string corrections_json;   // canonical corrections object
};

/// Instruction block, output-format block, and worked examples, loaded from
/// versioned data files so users can diff and swap them.
struct PromptTemplate {
  TemplateVariant variant = TemplateVariant::FewShot;
  std::string instructions;
  std::string format_block;
  std::vector<ShotExample> shots;  // empty for zero-shot

  std::string content_hash() const {
    std::string material;
    material += template_variant_name(variant);
    material += '\x1e';
    material += instructions;
    material += '\x1e';
    material += format_block;
    for (const ShotExample& shot : shots) {
      material += '\x1e';
      material += shot.generated_text;
      material += '\x1f';
      material += shot.ground_truth_text;
      material += '\x1f';
      material += shot.corrections_json;
    }
    return sha256_hex(material);
  }
};

namespace detail {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TemplateError("cannot read prompt file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace detail

/// Loads a template from `dir`: instructions.txt, format.json.txt and, for
/// the few-shot variant, shots/1..5/{generated.txt,ground_truth.txt,
/// corrections.json}. Exactly one shot must carry an empty corrections
/// object.
inline PromptTemplate load_prompt_template(const std::filesystem::path& dir,
                                           TemplateVariant variant) {
  PromptTemplate tmpl;
  tmpl.variant = variant;
  tmpl.instructions = detail::read_text_file(dir / "instructions.txt");
  tmpl.format_block = detail::read_text_file(dir / "format.json.txt");
  if (variant == TemplateVariant::FewShot) {
    int empty_shots = 0;
    for (int i = 1; i <= 5; ++i) {
      const std::filesystem::path shot_dir = dir / "shots" / std::to_string(i);
      ShotExample shot;
      shot.generated_text = trim(detail::read_text_file(shot_dir / "generated.txt"));
      shot.ground_truth_text = trim(detail::read_text_file(shot_dir / "ground_truth.txt"));
      shot.corrections_json = trim(detail::read_text_file(shot_dir / "corrections.json"));
      auto parsed = nlohmann::json::parse(shot.corrections_json, nullptr,
                                          /*allow_exceptions=*/false);
      if (parsed.is_discarded() || !parsed.is_object()) {
        throw TemplateError("shot " + std::to_string(i) + " corrections.json is not an object");
      }
      if (parsed.empty()) ++empty_shots;
      tmpl.shots.push_back(std::move(shot));
    }
    if (empty_shots != 1) {
      throw TemplateError("few-shot template must contain exactly one no-corrections shot");
    }
  }
  return tmpl;
}

/// Renders the worked examples followed by the query pair and the trailing
/// "Corrections:" cue.
inline std::string render_examples_and_query(const PromptTemplate& tmpl,
                                             const SegmentedReport& candidate,
                                             std::string_view ground_truth) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.shots.size(); ++i) {
    const ShotExample& shot = tmpl.shots[i];
    out += "Example " + std::to_string(i + 1) + ":\n\n";
    out += "Generated Text: " + shot.generated_text + "\n\n";
    out += "Ground Truth Text: " + shot.ground_truth_text + "\n\n";
    out += "Corrections: " + shot.corrections_json + "\n\n";
  }
  out += "Generated Text: " + number_lines(candidate);
  out += "\n\nGround Truth Text: ";
  out += trim(ground_truth);
  out += "\n\nCorrections: ";
  return out;
}

/// Full prompt text: instructions, format block, examples, query.
/// Deterministic for fixed inputs.
inline std::string render_prompt_text(const PromptTemplate& tmpl, const SegmentedReport& candidate,
                                      std::string_view ground_truth) {
  return trim(tmpl.instructions) + "\n\n" + trim(tmpl.format_block) + "\n\n" +
         render_examples_and_query(tmpl, candidate, ground_truth);
}

inline ChatMessages build_prompt(const PromptTemplate& tmpl, const SegmentedReport& candidate,
                                 std::string_view ground_truth,
                                 MessageMode mode = MessageMode::SingleUser) {
  if (mode == MessageMode::SingleUser) {
    return {{"user", render_prompt_text(tmpl, candidate, ground_truth)}};
  }
  return {{"system", trim(tmpl.instructions) + "\n\n" + trim(tmpl.format_block)},
          {"user", render_examples_and_query(tmpl, candidate, ground_truth)}};
}

}  // namespace radjudge
