// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ttscale {

using SlotMap = std::map<std::string, std::string>;

/// Placeholders are written `{{name}}` with name in [A-Za-z0-9_]. Any other
/// brace sequence is literal text. Substitution is a single pass: slot values
/// are inserted verbatim and never re-scanned.
std::string render_template(std::string_view text, const SlotMap& slots);

/// Distinct placeholder names in order of first appearance.
std::vector<std::string> placeholders(std::string_view text);

/// Named prompt templates. Defaults are compiled in from prompts/*.txt;
/// a directory of `<name>.txt` files may override or extend them.
class PromptLibrary {
 public:
  static PromptLibrary bundled();

  void load_directory(const std::string& directory);
  void set(std::string name, std::string text);

  bool contains(const std::string& name) const;
  const std::string& text(const std::string& name) const;
  std::vector<std::string> names() const;

  std::string render(const std::string& name, const SlotMap& slots) const;

 private:
  std::map<std::string, std::string> templates_;
};

namespace prompt_names {
inline constexpr const char* kDefaultGeneration = "default_generation";
inline constexpr const char* kMultiRoundInitial = "multi_round_initial";
inline constexpr const char* kMultiRoundSubsequent = "multi_round_subsequent";
inline constexpr const char* kSummarization = "summarization";
inline constexpr const char* kTieBreak = "tie_break";
inline constexpr const char* kGraderAgent = "grader_agent";
inline constexpr const char* kGraderRequest = "grader_request";
inline constexpr const char* kSimpleVerifier[3] = {"simple_verifier_1", "simple_verifier_2",
                                                   "simple_verifier_3"};
}  // namespace prompt_names

}  // namespace ttscale
