#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tcpsync::cli {

// A preset is a base configuration plus named variants applied as JSON merge patches.
struct Preset {
  std::string name;
  std::string description;
  std::string scaling;  // how the original topology was reduced for desk runs
  std::string command;  // subcommand the preset is meant for
  nlohmann::json config;
  nlohmann::json variants;  // object: variant name -> merge patch

  std::vector<std::string> variant_names() const;
};

// Presets compiled into the binary, sorted by name.
const std::vector<Preset>& presets();

// Throws std::invalid_argument for an unknown name.
const Preset& find_preset(const std::string& name);

// Base configuration with the variant patch applied. The configuration name
// becomes "preset" or "preset/variant".
nlohmann::json resolve_preset(const std::string& name,
                              const std::optional<std::string>& variant = std::nullopt);

}  // namespace tcpsync::cli
