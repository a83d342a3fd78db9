/**
 * @file config.hpp
 * @brief Scenario files: flat `key = value` INI sections, `;` comments.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bangride/controller.hpp"

namespace bangride {

struct ScenarioConfig {
  std::string model;        // spmet | ecm | pack | toy-linear
  std::string params_path;  // relative paths resolve against base_dir
  // One entry per output family. Voltage families take a terminal voltage
  // limit in volts; temperature families a rise over ambient in K.
  std::vector<double> bounds;
  std::vector<double> gamma;
  std::size_t t_f = 3000;
  double dt = 1.0;
  ControllerConfig controller{};
  std::uint64_t seed = 0;
  bool compute_J_star = true;
  bool compute_ct = true;
  std::string output_dir = "runs/out";
  std::size_t mc_models = 200;
  double mc_fraction = 0.1;

  std::filesystem::path base_dir;  // not serialized

  // Range and consistency checks that need no file access.
  void validate() const;
  std::filesystem::path resolved_params() const;
  bool operator==(const ScenarioConfig& o) const;
};

ScenarioConfig parse_config_string(const std::string& text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ScenarioConfig& cfg);

std::vector<double> parse_list(const std::string& s);
std::string read_text_file(const std::filesystem::path& p);

}  // namespace bangride
