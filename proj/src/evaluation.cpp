// SPDX-License-Identifier: Apache-2.0
#include "ttscale/evaluation.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <sstream>

#include <fmt/core.h>

#include "ttscale/errors.hpp"

namespace ttscale {

namespace {

struct Fence {
  std::size_t open;         // position of the opening ```
  std::size_t body;         // first character of the body
  std::size_t close;        // position of the closing ``` or npos
  std::string tag;
};

// Fences must start a line. The info string is the rest of the opening line.
std::vector<Fence> scan_fences(const std::string& text) {
  std::vector<Fence> fences;
  std::size_t pos = 0;
  auto at_line_start = [&](std::size_t p) { return p == 0 || text[p - 1] == '\n'; };
  auto find_fence = [&](std::size_t from) {
    for (std::size_t p = text.find("```", from); p != std::string::npos; p = text.find("```", p + 1)) {
      std::size_t q = p;
      while (q > 0 && (text[q - 1] == ' ' || text[q - 1] == '\t')) --q;
      if (at_line_start(q)) return p;
    }
    return std::string::npos;
  };
  while (true) {
    const auto open = find_fence(pos);
    if (open == std::string::npos) break;
    auto eol = text.find('\n', open);
    std::string tag = text.substr(open + 3, (eol == std::string::npos ? text.size() : eol) - open - 3);
    tag.erase(0, tag.find_first_not_of(" \t"));
    tag.erase(tag.find_last_not_of(" \t\r") + 1);
    if (eol == std::string::npos) {
      fences.push_back(Fence{open, text.size(), std::string::npos, tag});
      break;
    }
    const auto close = find_fence(eol + 1);
    fences.push_back(Fence{open, eol + 1, close, tag});
    if (close == std::string::npos) break;
    pos = close + 3;
  }
  return fences;
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::optional<std::string> extract_program(const std::string& reasoning) {
  std::optional<std::string> last;
  for (const auto& fence : scan_fences(reasoning)) {
    if (fence.close == std::string::npos) continue;
    const auto tag = lowercase(fence.tag);
    if (tag != "python" && tag != "py" && tag != "python3") continue;
    auto body = reasoning.substr(fence.body, fence.close - fence.body);
    // Drop indentation in front of the closing fence.
    const auto nl = body.find_last_of('\n');
    if (nl != std::string::npos && body.find_first_not_of(" \t", nl + 1) == std::string::npos) body.erase(nl + 1);
    last = std::move(body);
  }
  return last;
}

std::string strip_code_fences(const std::string& text) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& fence : scan_fences(text)) {
    out += text.substr(pos, fence.open - pos);
    if (fence.close == std::string::npos) return out;
    pos = fence.close + 3;
    if (pos < text.size() && text[pos] == '\n') ++pos;  // the fence line goes too
  }
  out += text.substr(pos);
  return out;
}

std::optional<std::string> infer_entry_point(const std::string& program) {
  static const std::regex def_line(R"(^def\s+([A-Za-z_][A-Za-z0-9_]*)\s*\()");
  std::optional<std::string> name;
  std::istringstream in(program);
  std::string line;
  std::smatch m;
  while (std::getline(in, line))
    if (std::regex_search(line, m, def_line)) name = m[1].str();
  return name;
}

std::string build_driver_script(const std::string& program, const std::string& entry_point) {
  std::string script = program;
  if (!script.empty() && script.back() != '\n') script += '\n';
  script += fmt::format(
      "\n\nif __name__ == \"__main__\":\n"
      "    import json as _tts_json, sys as _tts_sys\n"
      "    _tts_result = {0}(*_tts_json.loads(_tts_sys.argv[1]))\n"
      "    if not isinstance(_tts_result, (list, tuple)):\n"
      "        _tts_result = [_tts_result]\n"
      "    print(\"{1} \" + _tts_json.dumps([float(_v) for _v in _tts_result]))\n",
      entry_point, kOutputMarker);
  return script;
}

OutputEntry parse_execution(const ExecutionResult& result) {
  if (result.timed_out) return ErrorMarker{ErrorKind::Timeout};
  if (result.exit_code != 0) return ErrorMarker{ErrorKind::Execution};

  const std::string marker = std::string(kOutputMarker) + " ";
  std::optional<std::string> payload;
  std::istringstream in(result.stdout_text);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(marker, 0) == 0) payload = line.substr(marker.size());
  if (!payload) return ErrorMarker{ErrorKind::MalformedOutput};

  // json.dumps writes NaN/Infinity, which JSON parsers reject; strtod does not.
  auto& text = *payload;
  text.erase(text.find_last_not_of(" \t\r") + 1);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') return ErrorMarker{ErrorKind::MalformedOutput};
  NumericTuple values;
  bool nonfinite = false;
  std::string body = text.substr(1, text.size() - 2);
  if (body.find_first_not_of(" ") != std::string::npos) {
    std::istringstream items(body);
    std::string item;
    while (std::getline(items, item, ',')) {
      const char* begin = item.c_str();
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(begin, &end);
      while (*end == ' ') ++end;
      if (end == begin || *end != '\0') return ErrorMarker{ErrorKind::MalformedOutput};
      if (!std::isfinite(v)) nonfinite = true;
      values.push_back(v);
    }
  }
  if (nonfinite) return ErrorMarker{ErrorKind::NonFinite};
  if (values.empty()) return ErrorMarker{ErrorKind::MalformedOutput};
  return values;
}

bool values_close(double a, double b, double rtol, double atol) {
  if (a == b) return true;
  return std::fabs(a - b) <= std::max(rtol * std::max(std::fabs(a), std::fabs(b)), atol);
}

bool entries_equivalent(const OutputEntry& a, const OutputEntry& b, double rtol, double atol) {
  const auto* ma = std::get_if<ErrorMarker>(&a);
  const auto* mb = std::get_if<ErrorMarker>(&b);
  if (ma || mb) return ma && mb && *ma == *mb;
  const auto& ta = std::get<NumericTuple>(a);
  const auto& tb = std::get<NumericTuple>(b);
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i)
    if (!values_close(ta[i], tb[i], rtol, atol)) return false;
  return true;
}

bool vectors_equivalent(const OutputVector& a, const OutputVector& b, double rtol, double atol) {
  if (a.size() != b.size())
    throw LengthMismatchError(fmt::format("output vectors of length {} and {}", a.size(), b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!entries_equivalent(a[i], b[i], rtol, atol)) return false;
  return true;
}

std::optional<bool> judge_outputs(const OutputVector& outputs, const Problem& problem) {
  if (any_errors(outputs)) return std::nullopt;
  if (outputs.size() != problem.expected_outputs.size()) return false;
  for (std::size_t i = 0; i < outputs.size(); ++i)
    if (!entries_equivalent(outputs[i], problem.expected_outputs[i], problem.comparison_tolerance)) return false;
  return true;
}

Candidate evaluate_candidate(Candidate candidate, const Problem& problem, SandboxClient& sandbox,
                             const EvalSettings& settings, const Scope& scope, ExecMode mode) {
  if (!candidate.program_source) return candidate;
  const auto entry = problem.entry_point ? problem.entry_point : infer_entry_point(*candidate.program_source);
  OutputVector outputs;
  if (!entry) {
    // Nothing callable: every input fails the same way.
    outputs.assign(problem.test_count(), ErrorMarker{ErrorKind::Execution});
  } else {
    const std::string script = build_driver_script(*candidate.program_source, *entry);
    for (std::size_t i = 0; i < problem.test_count(); ++i) {
      SandboxRequest request{script, settings.timeout_s, settings.mem_limit_mb, {problem.test_inputs[i].dump()}};
      outputs.push_back(parse_execution(sandbox.run(request, scope.with_input(static_cast<int>(i)), mode)));
    }
  }
  candidate.is_correct = judge_outputs(outputs, problem);
  candidate.output_vector = std::move(outputs);
  return candidate;
}

std::optional<std::size_t> DistinctSet::group_of(int index) const {
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (std::binary_search(groups[g].begin(), groups[g].end(), index)) return g;
  return std::nullopt;
}

DistinctSet dedup(const std::vector<Candidate>& candidates, double rtol, double atol) {
  std::vector<const Candidate*> order;
  for (const auto& c : candidates) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->index < b->index; });

  DistinctSet set;
  std::vector<const OutputVector*> rep_vectors;
  for (const auto* c : order) {
    if (!c->output_vector || c->output_vector->empty() || all_errors(*c->output_vector)) {
      set.error_group.push_back(c->index);
      continue;
    }
    bool placed = false;
    for (std::size_t g = 0; g < rep_vectors.size() && !placed; ++g) {
      if (rep_vectors[g]->size() == c->output_vector->size() &&
          vectors_equivalent(*rep_vectors[g], *c->output_vector, rtol, atol)) {
        set.groups[g].push_back(c->index);
        placed = true;
      }
    }
    if (!placed) {
      set.groups.push_back({c->index});
      set.representatives.push_back(c->index);
      rep_vectors.push_back(&*c->output_vector);
    }
  }
  return set;
}

}  // namespace ttscale
