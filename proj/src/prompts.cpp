#include "fluxmem/prompts.hpp"

#include <utility>

#include "fluxmem/error.hpp"

namespace fluxmem::prompts {
namespace {

// Generated at configure time from assets/prompts/*.txt.
#include "prompt_assets.inc"

const std::map<std::string, std::string, std::less<>>& table() {
  static const auto* templates = [] {
    auto* m = new std::map<std::string, std::string, std::less<>>();
    for (const auto& [name, text] : kPromptAssets) m->emplace(name, text);
    return m;
  }();
  return *templates;
}

}  // namespace

const std::string& get(std::string_view name) {
  const auto& t = table();
  auto it = t.find(name);
  if (it == t.end()) throw InvalidArgument("unknown prompt template '" + std::string(name) + "'");
  return it->second;
}

std::string render(std::string_view name, const std::map<std::string, std::string>& values) {
  std::string out = get(name);
  for (const auto& [key, value] : values) {
    const std::string placeholder = "{{" + key + "}}";
    std::size_t pos = 0;
    while ((pos = out.find(placeholder, pos)) != std::string::npos) {
      out.replace(pos, placeholder.size(), value);
      pos += value.size();
    }
  }
  return out;
}

}  // namespace fluxmem::prompts
