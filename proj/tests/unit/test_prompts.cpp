// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "ttscale/errors.hpp"
#include "ttscale/prompts.hpp"

namespace ttscale {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Plain find/replace, independent of the renderer.
std::string manual_substitute(std::string text, const std::string& name, const std::string& value) {
  const std::string key = "{{" + name + "}}";
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size()))
    text.replace(pos, key.size(), value);
  return text;
}

TEST(Prompts, BundledTemplatesMatchShippedFiles) {
  const auto library = PromptLibrary::bundled();
  const std::vector<std::string> expected = {
      "default_generation", "grader_agent",      "grader_request",    "multi_round_initial",
      "multi_round_subsequent", "simple_verifier_1", "simple_verifier_2", "simple_verifier_3",
      "summarization",      "tie_break"};
  EXPECT_EQ(library.names(), expected);
  for (const auto& name : expected)
    EXPECT_EQ(library.text(name), read_file(testing::source_path("prompts/" + name + ".txt"))) << name;
}

TEST(Prompts, DefaultGenerationFillsBothSlots) {
  const auto library = PromptLibrary::bundled();
  const std::string statement = "Compute the drag force on a sphere.";
  const std::string requirements = "def drag(v: float) -> float";
  const auto out = library.render("default_generation",
                                  {{"problem_statement", statement}, {"code_requirements", requirements}});
  auto oracle = manual_substitute(library.text("default_generation"), "problem_statement", statement);
  oracle = manual_substitute(oracle, "code_requirements", requirements);
  EXPECT_EQ(out, oracle);
  EXPECT_NE(out.find("IMPORTANT SOLUTION REQUIREMENTS"), std::string::npos);
  EXPECT_NE(out.find("You MUST wrap the final Python code between"), std::string::npos);
  EXPECT_EQ(out.find("{{"), std::string::npos);
}

TEST(Prompts, NoPlaceholdersIsIdentity) {
  const std::string text = "Plain text with {single} braces and } stray ones {{ not a slot";
  EXPECT_EQ(render_template(text, {}), text);
  EXPECT_TRUE(placeholders(text).empty());
}

TEST(Prompts, RepeatedPlaceholderSubstitutedEverywhere) {
  const std::string text = "{{x}} + {{x}} = 2 {{x}}; {{y}}";
  const auto out = render_template(text, {{"x", "a_e"}, {"y", "done"}});
  EXPECT_EQ(out, manual_substitute(manual_substitute(text, "x", "a_e"), "y", "done"));
  EXPECT_EQ(placeholders(text), (std::vector<std::string>{"x", "y"}));
}

TEST(Prompts, SlotValuesAreNotRescanned) {
  EXPECT_EQ(render_template("[{{a}}]", {{"a", "{{b}}"}, {"b", "no"}}), "[{{b}}]");
}

TEST(Prompts, MissingSlotIsNamed) {
  try {
    render_template("Q: {{question}} R: {{answer_requirements}}", {{"question", "q"}});
    FAIL() << "expected MissingPlaceholderError";
  } catch (const MissingPlaceholderError& e) {
    EXPECT_EQ(e.slot(), "answer_requirements");
  }
}

TEST(Prompts, UnknownTemplate) {
  EXPECT_THROW(PromptLibrary::bundled().render("nope", {}), UnknownTemplateError);
}

TEST(Prompts, RenderingIsPure) {
  const auto library = PromptLibrary::bundled();
  const SlotMap slots = {{"problem_statement", "P"}, {"answer_requirement", "R"},
                         {"attempt_1", "one"},       {"attempt_2", "two"}};
  EXPECT_EQ(library.render("tie_break", slots), library.render("tie_break", slots));
}

TEST(Prompts, DirectoryOverridesBundled) {
  const auto dir = testing::scratch_dir("prompts");
  std::ofstream(dir / "tie_break.txt") << "custom {{attempt_1}}";
  std::ofstream(dir / "extra.txt") << "extra";
  auto library = PromptLibrary::bundled();
  library.load_directory(dir.string());
  EXPECT_EQ(library.render("tie_break", {{"attempt_1", "A"}}), "custom A");
  EXPECT_TRUE(library.contains("extra"));
  EXPECT_TRUE(library.contains("grader_agent"));
  EXPECT_THROW(library.load_directory((dir / "missing").string()), ConfigError);
}

}  // namespace
}  // namespace ttscale
