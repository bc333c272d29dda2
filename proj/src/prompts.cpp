// SPDX-License-Identifier: Apache-2.0
#include "ttscale/prompts.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "ttscale/errors.hpp"

namespace ttscale {

namespace detail {
const std::map<std::string, std::string>& bundled_prompts();
}

namespace {

bool is_slot_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// If a placeholder starts at `pos`, returns its name and length.
std::optional<std::pair<std::string_view, std::size_t>> placeholder_at(std::string_view text,
                                                                       std::size_t pos) {
  if (text.compare(pos, 2, "{{") != 0) return std::nullopt;
  std::size_t end = pos + 2;
  while (end < text.size() && is_slot_char(text[end])) ++end;
  if (end == pos + 2 || text.compare(end, 2, "}}") != 0) return std::nullopt;
  return std::pair{text.substr(pos + 2, end - pos - 2), end + 2 - pos};
}

}  // namespace

std::string render_template(std::string_view text, const SlotMap& slots) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (auto slot = placeholder_at(text, pos)) {
      auto it = slots.find(std::string(slot->first));
      if (it == slots.end()) throw MissingPlaceholderError(std::string(slot->first));
      out += it->second;
      pos += slot->second;
    } else {
      out += text[pos++];
    }
  }
  return out;
}

std::vector<std::string> placeholders(std::string_view text) {
  std::vector<std::string> names;
  for (std::size_t pos = 0; pos < text.size();) {
    if (auto slot = placeholder_at(text, pos)) {
      std::string name(slot->first);
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
      pos += slot->second;
    } else {
      ++pos;
    }
  }
  return names;
}

PromptLibrary PromptLibrary::bundled() {
  PromptLibrary library;
  for (const auto& [name, text] : detail::bundled_prompts()) library.set(name, text);
  return library;
}

void PromptLibrary::load_directory(const std::string& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) throw ConfigError("prompt directory '" + directory + "' not found");
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    set(entry.path().stem().string(), buffer.str());
  }
}

void PromptLibrary::set(std::string name, std::string text) {
  templates_[std::move(name)] = std::move(text);
}

bool PromptLibrary::contains(const std::string& name) const { return templates_.count(name) > 0; }

const std::string& PromptLibrary::text(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw UnknownTemplateError("no prompt template named '" + name + "'");
  return it->second;
}

std::vector<std::string> PromptLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : templates_) out.push_back(name);
  return out;
}

std::string PromptLibrary::render(const std::string& name, const SlotMap& slots) const {
  return render_template(text(name), slots);
}

}  // namespace ttscale
