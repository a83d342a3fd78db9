#include "bangride/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bangride/errors.hpp"

namespace bangride {

namespace pt = boost::property_tree;

namespace {

std::string fmt17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt17(v[i]);
  return s;
}

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (s.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " is not a number: '" + s + "'");
  }
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config: " + key + " is not a boolean: '" + s + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
    const auto v = std::stoull(s, &pos);
    if (s.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " is not a non-negative integer: '" + s + "'");
  }
}

Vec2 to_vec2(const std::string& key, const std::string& s) {
  const auto v = parse_list(s);
  if (v.size() != 2) throw ConfigError("config: " + key + " needs exactly two values");
  return {v[0], v[1]};
}

}  // namespace

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("config: empty list entry in '" + s + "'");
    out.push_back(to_double("list", item.substr(b)));
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void ScenarioConfig::validate() const {
  if (model != "spmet" && model != "ecm" && model != "pack" && model != "toy-linear")
    throw ConfigError("config: unknown model '" + model + "' (valid: spmet, ecm, pack, toy-linear)");
  if (params_path.empty()) throw ConfigError("config: scenario.params is required");
  if (bounds.empty() || bounds.size() != gamma.size())
    throw ConfigError("config: constraints.bounds and constraints.gamma must be non-empty and equally long");
  for (double g : gamma)
    if (!(g > 0.0)) throw ConfigError("config: every gamma must be > 0");
  for (double b : bounds)
    if (!std::isfinite(b)) throw ConfigError("config: bounds must be finite");
  if (!(bounds[0] > 0.0)) throw ConfigError("config: u_max must be > 0");
  if (!(dt > 0.0)) throw ConfigError("config: dt must be > 0");
  controller.validate();
  if (mc_models < 1) throw ConfigError("config: robustness.models must be >= 1");
  if (!(mc_fraction >= 0.0 && mc_fraction < 1.0)) throw ConfigError("config: robustness.fraction must lie in [0, 1)");
}

std::filesystem::path ScenarioConfig::resolved_params() const {
  std::filesystem::path p(params_path);
  return p.is_absolute() ? p : base_dir / p;
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  const auto& a = controller;
  const auto& b = o.controller;
  return model == o.model && params_path == o.params_path && bounds == o.bounds && gamma == o.gamma &&
         t_f == o.t_f && dt == o.dt && a.theta0 == b.theta0 && a.box.lo == b.box.lo && a.box.hi == b.box.hi &&
         a.mu1 == b.mu1 && a.clip == b.clip && a.clamp_current == b.clamp_current && seed == o.seed &&
         compute_J_star == o.compute_J_star && compute_ct == o.compute_ct && output_dir == o.output_dir &&
         mc_models == o.mc_models && mc_fraction == o.mc_fraction;
}

ScenarioConfig parse_config_string(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  static const std::vector<std::pair<std::string, std::vector<std::string>>> known = {
      {"scenario", {"model", "params", "t_f", "dt", "seed", "output_dir"}},
      {"constraints", {"bounds", "gamma"}},
      {"controller", {"theta0", "theta_lo", "theta_hi", "mu1", "clip", "clamp_current"}},
      {"analysis", {"J_star", "c_t"}},
      {"robustness", {"models", "fraction"}}};
  for (const auto& [sec, body] : tree) {
    auto it = std::find_if(known.begin(), known.end(), [&](const auto& k) { return k.first == sec; });
    if (it == known.end()) throw ConfigError("config: unknown section [" + sec + "]");
    for (const auto& [key, _] : body)
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        throw ConfigError("config: unknown key " + sec + "." + key);
  }
  auto get = [&](const std::string& k) { return tree.get_optional<std::string>(pt::ptree::path_type(k, '.')); };
  auto req = [&](const std::string& k) {
    auto v = get(k);
    if (!v) throw ConfigError("config: missing " + k);
    return *v;
  };

  ScenarioConfig c;
  c.base_dir = base_dir;
  c.model = req("scenario.model");
  c.params_path = req("scenario.params");
  c.bounds = parse_list(req("constraints.bounds"));
  c.gamma = parse_list(req("constraints.gamma"));
  if (auto v = get("scenario.t_f")) c.t_f = to_u64("scenario.t_f", *v);
  if (auto v = get("scenario.dt")) c.dt = to_double("scenario.dt", *v);
  if (auto v = get("scenario.seed")) c.seed = to_u64("scenario.seed", *v);
  if (auto v = get("scenario.output_dir")) c.output_dir = *v;
  if (auto v = get("controller.theta0")) c.controller.theta0 = to_vec2("controller.theta0", *v);
  if (auto v = get("controller.theta_lo")) c.controller.box.lo = to_vec2("controller.theta_lo", *v);
  if (auto v = get("controller.theta_hi")) c.controller.box.hi = to_vec2("controller.theta_hi", *v);
  if (auto v = get("controller.mu1")) c.controller.mu1 = to_double("controller.mu1", *v);
  if (auto v = get("controller.clip"); v && *v != "off" && *v != "none")
    c.controller.clip = to_double("controller.clip", *v);
  if (auto v = get("controller.clamp_current")) c.controller.clamp_current = to_bool("controller.clamp_current", *v);
  if (auto v = get("analysis.J_star")) c.compute_J_star = to_bool("analysis.J_star", *v);
  if (auto v = get("analysis.c_t")) c.compute_ct = to_bool("analysis.c_t", *v);
  if (auto v = get("robustness.models")) c.mc_models = to_u64("robustness.models", *v);
  if (auto v = get("robustness.fraction")) c.mc_fraction = to_double("robustness.fraction", *v);
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  return parse_config_string(read_text_file(path), path.parent_path());
}

std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream os;
  os << "[scenario]\n"
     << "model = " << c.model << "\n"
     << "params = " << c.params_path << "\n"
     << "t_f = " << c.t_f << "\n"
     << "dt = " << fmt17(c.dt) << "\n"
     << "seed = " << c.seed << "\n"
     << "output_dir = " << c.output_dir << "\n\n"
     << "[constraints]\n"
     << "bounds = " << join(c.bounds) << "\n"
     << "gamma = " << join(c.gamma) << "\n\n"
     << "[controller]\n"
     << "theta0 = " << join({c.controller.theta0[0], c.controller.theta0[1]}) << "\n"
     << "theta_lo = " << join({c.controller.box.lo[0], c.controller.box.lo[1]}) << "\n"
     << "theta_hi = " << join({c.controller.box.hi[0], c.controller.box.hi[1]}) << "\n"
     << "mu1 = " << fmt17(c.controller.mu1) << "\n"
     << "clip = " << (c.controller.clip ? fmt17(*c.controller.clip) : std::string("off")) << "\n"
     << "clamp_current = " << (c.controller.clamp_current ? "true" : "false") << "\n\n"
     << "[analysis]\n"
     << "J_star = " << (c.compute_J_star ? "true" : "false") << "\n"
     << "c_t = " << (c.compute_ct ? "true" : "false") << "\n\n"
     << "[robustness]\n"
     << "models = " << c.mc_models << "\n"
     << "fraction = " << fmt17(c.mc_fraction) << "\n";
  return os.str();
}

}  // namespace bangride
