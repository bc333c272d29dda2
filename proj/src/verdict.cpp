// SPDX-License-Identifier: Apache-2.0
#include "ttscale/verdict.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "ttscale/errors.hpp"

namespace ttscale {

namespace {

[[noreturn]] void violation(const std::string& field, const std::string& what) {
  throw VerdictParseError(VerdictParseError::Kind::SchemaViolation, field, field + ": " + what);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) violation(path + key, "missing");
  return *it;
}

std::string string_field(const json& j, const std::string& key, const std::string& path, bool nullable) {
  const auto& v = require(j, key, path);
  if (v.is_string()) return v.get<std::string>();
  if (nullable && v.is_null()) return {};
  violation(path + key, "expected a string");
}

bool bool_field(const json& j, const std::string& key, const std::string& path) {
  const auto& v = require(j, key, path);
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true") return true;
    if (s == "false") return false;
  }
  violation(path + key, "expected a boolean");
}

}  // namespace

std::string strip_fence_lines(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line.compare(first, 3, "```") == 0) continue;
    out += line;
    out += '\n';
  }
  return out;
}

json extract_first_object(const std::string& raw) {
  const std::string text = strip_fence_lines(raw);
  for (std::size_t start = text.find('{'); start != std::string::npos; start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        auto parsed = json::parse(text.begin() + start, text.begin() + i + 1, nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return parsed;
        break;
      }
    }
  }
  throw VerdictParseError(VerdictParseError::Kind::NoObjectFound, "", "no JSON object found in model output");
}

StepCheck parse_step_check(const json& j, const std::string& path) {
  if (!j.is_object()) violation(path.empty() ? "step" : path.substr(0, path.size() - 1), "expected an object");
  StepCheck step;
  const auto& number = require(j, "step_number", path);
  if (!number.is_number_integer() || number.get<std::int64_t>() < 1)
    violation(path + "step_number", "expected a positive integer");
  step.step_number = number.get<int>();
  step.calculation_description = string_field(j, "calculation_description", path, false);
  step.script_content = string_field(j, "sympy_script_content", path, false);
  step.script_stdout = string_field(j, "script_stdout", path, false);
  step.script_stderr = string_field(j, "script_stderr", path, true);
  step.is_correct = bool_field(j, "is_correct", path);
  step.error_explanation = string_field(j, "error_explanation", path, true);
  return step;
}

Verdict verdict_from_object(const json& j) {
  Verdict verdict;
  const auto& score = require(j, "overall_score", "");
  if (!score.is_number_integer()) violation("overall_score", "expected an integer");
  const auto value = score.get<std::int64_t>();
  if (value != 0 && value != 1) violation("overall_score", "must be 0 or 1");
  verdict.overall_score = static_cast<int>(value);

  const auto& steps = require(j, "sympy_verification", "");
  if (!steps.is_array()) violation("sympy_verification", "expected an array");
  for (std::size_t i = 0; i < steps.size(); ++i)
    verdict.step_checks.push_back(parse_step_check(steps[i], "sympy_verification[" + std::to_string(i) + "]."));

  verdict.general_feedback = string_field(j, "general_feedback", "", false);
  return verdict;
}

Verdict parse_verdict(const std::string& content) { return verdict_from_object(extract_first_object(content)); }

std::optional<bool> parse_simple_verdict(const std::string& content) {
  try {
    const auto j = extract_first_object(content);
    if (auto it = j.find("is_solution_correct"); it != j.end()) {
      if (it->is_boolean()) return it->get<bool>();
      if (it->is_string()) {
        std::string s = it->get<std::string>();
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        if (s == "yes") return true;
        if (s == "no") return false;
      }
      return std::nullopt;
    }
  } catch (const VerdictParseError&) {
  }
  // The prompt itself shows single-quoted values, which is not JSON.
  static const std::regex loose(R"re(["']is_solution_correct["']\s*:\s*["']?(yes|no)\b)re", std::regex::icase);
  std::smatch m;
  if (std::regex_search(content, m, loose)) {
    auto v = m[1].str();
    return v[0] == 'y' || v[0] == 'Y';
  }
  return std::nullopt;
}

std::optional<int> parse_tie_break(const std::string& content) {
  auto accept = [](const json& v) -> std::optional<int> {
    if (v.is_number_integer()) {
      const auto n = v.get<std::int64_t>();
      if (n == 1 || n == 2) return static_cast<int>(n);
    } else if (v.is_string()) {
      std::string s = v.get<std::string>();
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      if (s == "1" || s == "2") return s[0] - '0';
    }
    return std::nullopt;
  };
  try {
    const auto j = extract_first_object(content);
    if (auto it = j.find("correct_attempt"); it != j.end()) return accept(*it);
  } catch (const VerdictParseError&) {
  }
  static const std::regex loose(R"re(["']correct_attempt["']\s*:\s*["']?\s*([12])\s*["']?\s*[,}])re");
  std::smatch m;
  if (std::regex_search(content, m, loose)) return m[1].str()[0] - '0';
  return std::nullopt;
}

}  // namespace ttscale
