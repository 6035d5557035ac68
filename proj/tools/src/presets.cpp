#include "tcpsync_cli/presets.hpp"

#include <algorithm>
#include <stdexcept>
#include <string_view>

#include "preset_data.hpp"

namespace tcpsync::cli {

std::vector<std::string> Preset::variant_names() const {
  std::vector<std::string> names;
  for (const auto& [k, v] : variants.items()) names.push_back(k);
  return names;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = [] {
    std::vector<Preset> out;
    for (const auto& [name, text] : detail::preset_sources) {
      const auto j = nlohmann::json::parse(text);
      Preset p;
      p.name = std::string(name);
      p.description = j.at("description").get<std::string>();
      p.scaling = j.at("scaling").get<std::string>();
      p.command = j.at("command").get<std::string>();
      p.config = j.at("config");
      p.variants = j.value("variants", nlohmann::json::object());
      out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end(),
              [](const Preset& a, const Preset& b) { return a.name < b.name; });
    return out;
  }();
  return all;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

nlohmann::json resolve_preset(const std::string& name, const std::optional<std::string>& variant) {
  const auto& p = find_preset(name);
  nlohmann::json cfg = p.config;
  cfg["name"] = p.name;
  if (variant) {
    if (!p.variants.contains(*variant)) {
      throw std::invalid_argument("preset '" + name + "' has no variant '" + *variant + "'");
    }
    cfg.merge_patch(p.variants.at(*variant));
    cfg["name"] = p.name + "/" + *variant;
  }
  return cfg;
}

}  // namespace tcpsync::cli
