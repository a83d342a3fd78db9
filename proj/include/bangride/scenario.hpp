/**
 * @file scenario.hpp
 * @brief Builds a model, constraint set and initial state from a scenario
 *        file and its parameter file.
 */
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "bangride/config.hpp"
#include "bangride/ecm.hpp"
#include "bangride/pack.hpp"
#include "bangride/plant.hpp"
#include "bangride/spmet.hpp"
#include "bangride/toy.hpp"

namespace bangride {

struct Scenario {
  ScenarioConfig cfg;
  std::unique_ptr<PlantModel> model;
  ConstraintSpec spec;
  State x0;
  std::optional<EcmParams> ecm;  // set for the single-cell ECM
  std::string params_text;
};

// Section -> key -> raw value. Values keep their text so model loaders can
// parse enums as well as numbers.
using ParamFile = std::map<std::string, std::map<std::string, std::string>>;
ParamFile parse_param_file(const std::string& text);

EcmParams ecm_params_from(const ParamFile& f, const std::string& section);
SpmetParams spmet_params_from(const ParamFile& f);
ToyParams toy_params_from(const ParamFile& f);

// Expands per-family bounds and weights to per-output vectors. Voltage bounds
// are converted to the model's voltage output units.
ConstraintSpec expand_spec(const PlantModel& model, const std::vector<double>& family_bounds,
                           const std::vector<double>& family_gamma);

Scenario build_scenario(const ScenarioConfig& cfg);
Scenario build_scenario(const ScenarioConfig& cfg, const std::string& params_text);

}  // namespace bangride
