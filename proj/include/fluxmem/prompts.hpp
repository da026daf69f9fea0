#pragma once

#include <map>
#include <string>
#include <string_view>

namespace fluxmem::prompts {

inline constexpr std::string_view kTemplateVersion = "fluxmem-prompts/1";

/// Template text by name: response, meta_info, entity_relation, hierarchical, procedural.
/// Throws InvalidArgument for an unknown name.
const std::string& get(std::string_view name);

/// Replaces every {{key}} with its value; unknown placeholders are left untouched.
std::string render(std::string_view name, const std::map<std::string, std::string>& values);

}  // namespace fluxmem::prompts
