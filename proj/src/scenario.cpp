#include "bangride/scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <set>
#include <sstream>

#include "bangride/errors.hpp"

namespace bangride {

namespace pt = boost::property_tree;

ParamFile parse_param_file(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("parameter file: ") + e.what());
  }
  ParamFile f;
  for (const auto& [sec, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("parameter file: key '" + sec + "' outside a section");
    for (const auto& [k, v] : body) f[sec][k] = v.data();
  }
  return f;
}

namespace {

double num(const std::string& where, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (s.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("parameter file: " + where + " is not a number: '" + s + "'");
  }
}

using FieldTable = std::vector<std::pair<const char*, double*>>;

void fill(const ParamFile& f, const std::string& section, const FieldTable& fields,
          const std::set<std::string>& extra = {}) {
  auto it = f.find(section);
  if (it == f.end()) throw ConfigError("parameter file: missing section [" + section + "]");
  for (const auto& [k, v] : it->second) {
    bool found = extra.count(k) > 0;
    for (const auto& [name, ptr] : fields) {
      if (k == name) {
        *ptr = num(section + "." + k, v);
        found = true;
      }
    }
    if (!found) throw ConfigError("parameter file: unknown key " + section + "." + k);
  }
}

const std::string* lookup(const ParamFile& f, const std::string& sec, const std::string& key) {
  auto it = f.find(sec);
  if (it == f.end()) return nullptr;
  auto jt = it->second.find(key);
  return jt == it->second.end() ? nullptr : &jt->second;
}

double get_or(const ParamFile& f, const std::string& sec, const std::string& key, double def) {
  const std::string* s = lookup(f, sec, key);
  return s ? num(sec + "." + key, *s) : def;
}

void only_keys(const ParamFile& f, const std::string& sec, const std::set<std::string>& keys) {
  auto it = f.find(sec);
  if (it == f.end()) return;
  for (const auto& [k, _] : it->second)
    if (!keys.count(k)) throw ConfigError("parameter file: unknown key " + sec + "." + k);
}

void only_sections(const ParamFile& f, const std::set<std::string>& secs) {
  for (const auto& [s, _] : f)
    if (!secs.count(s)) throw ConfigError("parameter file: unknown section [" + s + "]");
}

}  // namespace

EcmParams ecm_params_from(const ParamFile& f, const std::string& section) {
  EcmParams p;
  fill(f, section,
       {{"Ro", &p.Ro}, {"R1", &p.R1}, {"C1", &p.C1}, {"R2", &p.R2}, {"C2", &p.C2}, {"Q", &p.Q}, {"a", &p.a},
        {"b", &p.b}, {"Ta", &p.Ta}, {"v0", &p.v0}, {"k_ocv", &p.k_ocv}, {"dt", &p.dt}});
  return p;
}

SpmetParams spmet_params_from(const ParamFile& f) {
  SpmetParams p;
  fill(f, "spmet",
       {{"dt", &p.dt},         {"F", &p.F},           {"R", &p.R},           {"Q_Ah", &p.Q_Ah},
        {"c_max", &p.c_max},   {"theta1", &p.theta1}, {"theta2", &p.theta2}, {"Vp", &p.Vp},
        {"G", &p.G},           {"beta", &p.beta},     {"tau", &p.tau},       {"D_neg", &p.D_neg},
        {"D_pos", &p.D_pos},   {"L_neg", &p.L_neg},   {"L_pos", &p.L_pos},   {"eps_neg", &p.eps_neg},
        {"eps_pos", &p.eps_pos}, {"N1_neg", &p.N1_neg}, {"N1_pos", &p.N1_pos}, {"N2_neg", &p.N2_neg},
        {"N2_pos", &p.N2_pos}, {"N3_neg", &p.N3_neg}, {"N3_pos", &p.N3_pos}, {"Ve_neg", &p.Ve_neg},
        {"Ve_pos", &p.Ve_pos}, {"ce0", &p.ce0},       {"a", &p.a},           {"b", &p.b},
        {"Ta", &p.Ta},         {"Un0", &p.Un0},       {"Un1", &p.Un1},       {"Un2", &p.Un2},
        {"Up0", &p.Up0},       {"Up1", &p.Up1},       {"Up2", &p.Up2},       {"thp_soc0", &p.thp_soc0},
        {"thp_soc1", &p.thp_soc1}, {"k_neg", &p.k_neg}, {"k_pos", &p.k_pos}, {"R_e", &p.R_e},
        {"t_plus", &p.t_plus}, {"monotone_check_current", &p.monotone_check_current}});
  return p;
}

ToyParams toy_params_from(const ParamFile& f) {
  ToyParams p;
  fill(f, "toy", {{"a", &p.a}, {"b", &p.b}, {"c", &p.c}, {"d", &p.d}});
  return p;
}

ConstraintSpec expand_spec(const PlantModel& model, const std::vector<double>& fb, const std::vector<double>& fg) {
  const std::size_t nf = model.family_count();
  if (fb.size() != nf || fg.size() != nf) {
    std::string names;
    for (const auto& n : model.family_names()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("model " + model.name() + " needs " + std::to_string(nf) + " bounds and weights (" + names +
                      "), got " + std::to_string(fb.size()) + " and " + std::to_string(fg.size()));
  }
  ConstraintSpec s;
  const std::size_t p = model.output_count();
  s.ybar.resize(p);
  s.gamma.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    const std::size_t fam = model.family_of(i);
    s.ybar[i] = fb[fam];
    s.gamma[i] = fg[fam];
  }
  if (const auto* e = dynamic_cast<const EcmModel*>(&model)) {
    s.ybar[1] = e->params().voltage_bound(fb[1]);
  } else if (const auto* pk = dynamic_cast<const PackModel*>(&model)) {
    for (std::size_t c = 0; c < pk->N(); ++c) s.ybar[1 + c] = pk->params().cells[c].voltage_bound(fb[1]);
  }
  s.validate();
  return s;
}

Scenario build_scenario(const ScenarioConfig& cfg) {
  return build_scenario(cfg, read_text_file(cfg.resolved_params()));
}

Scenario build_scenario(const ScenarioConfig& cfg, const std::string& params_text) {
  cfg.validate();
  Scenario sc;
  sc.cfg = cfg;
  sc.params_text = params_text;
  const ParamFile f = parse_param_file(params_text);
  if (cfg.model == "ecm") {
    only_sections(f, {"ecm", "initial"});
    EcmParams p = ecm_params_from(f, "ecm");
    p.dt = cfg.dt;
    only_keys(f, "initial", {"soc", "dT"});
    sc.ecm = p;
    sc.model = std::make_unique<EcmModel>(p);
    sc.x0 = {0.0, 0.0, get_or(f, "initial", "soc", 0.1), get_or(f, "initial", "dT", 0.0)};
  } else if (cfg.model == "spmet") {
    only_sections(f, {"spmet", "initial"});
    SpmetParams p = spmet_params_from(f);
    p.dt = cfg.dt;
    only_keys(f, "initial", {"c_frac", "T0"});
    auto m = std::make_unique<SpmetModel>(p);
    sc.x0 = m->initial_state(get_or(f, "initial", "c_frac", 0.1), get_or(f, "initial", "T0", p.Ta));
    sc.model = std::move(m);
  } else if (cfg.model == "pack") {
    only_sections(f, {"cell", "pack", "initial"});
    EcmParams base = ecm_params_from(f, "cell");
    base.dt = cfg.dt;
    only_keys(f, "pack", {"cells", "variation", "variation_seed", "k1", "k2", "mode"});
    only_keys(f, "initial", {"soc"});
    const double n = get_or(f, "pack", "cells", 100);
    if (!(n >= 2) || n != static_cast<double>(static_cast<std::size_t>(n)))
      throw ConfigError("parameter file: pack.cells must be an integer >= 2");
    PairMode mode = PairMode::MaxMinusMin;
    if (const std::string* m = lookup(f, "pack", "mode")) {
      if (*m == "all-pairs") mode = PairMode::AllPairs;
      else if (*m != "max-minus-min") throw ConfigError("parameter file: pack.mode must be all-pairs or max-minus-min");
    }
    const double vseed = get_or(f, "pack", "variation_seed", 1);
    const PackParams pp = make_pack(base, static_cast<std::size_t>(n), get_or(f, "pack", "variation", 0.0),
                                    static_cast<std::uint64_t>(vseed), get_or(f, "pack", "k1", 5e-4),
                                    get_or(f, "pack", "k2", 5e-4), mode);
    auto m = std::make_unique<PackModel>(pp);
    sc.x0 = m->initial_state(get_or(f, "initial", "soc", 0.1));
    sc.model = std::move(m);
  } else {
    only_sections(f, {"toy", "initial"});
    const ToyParams p = toy_params_from(f);
    only_keys(f, "initial", {"x"});
    sc.model = std::make_unique<ToyLinearModel>(p);
    sc.x0 = {get_or(f, "initial", "x", 0.0)};
  }
  sc.spec = expand_spec(*sc.model, cfg.bounds, cfg.gamma);
  return sc;
}

}  // namespace bangride
