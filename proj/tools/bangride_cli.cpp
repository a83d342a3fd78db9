// bangride command line: simulate, oracle, compare, montecarlo, regret, validate.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bangride/analysis.hpp"
#include "bangride/config.hpp"
#include "bangride/errors.hpp"
#include "bangride/oracle.hpp"
#include "bangride/output.hpp"
#include "bangride/scenario.hpp"
#include "bangride/sim.hpp"

namespace fs = std::filesystem;
using namespace bangride;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 1;
constexpr int kDiverged = 2;
constexpr int kValidate = 3;

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::vector<double> mu1;
  std::string gamma;
  std::optional<std::size_t> models;
  std::optional<double> fraction;
  std::size_t jobs = 1;
  bool svg = false;
  std::vector<std::string> csv;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "scenario file")->required();
  sub->add_option("--out", f.out, "output directory (default: output_dir from the config)");
  sub->add_option("--seed", f.seed, "seed");
  sub->add_option("--steps", f.steps, "horizon t_f");
  sub->add_option("--gamma", f.gamma, "per-family weights, comma separated");
  sub->add_flag("--svg", f.svg, "emit line plots");
}

struct Run {
  ScenarioConfig cfg;
  Scenario sc;
  fs::path dir;
  std::string hash;
  Manifest manifest;
};

Run prepare(const Flags& f, const std::string& command) {
  Run r;
  r.cfg = load_config(f.config);
  if (f.seed) r.cfg.seed = *f.seed;
  if (f.steps) r.cfg.t_f = *f.steps;
  if (f.mu1.size() == 1) r.cfg.controller.mu1 = f.mu1[0];
  if (!f.gamma.empty()) r.cfg.gamma = parse_list(f.gamma);
  if (f.models) r.cfg.mc_models = *f.models;
  if (f.fraction) r.cfg.mc_fraction = *f.fraction;
  r.cfg.validate();
  r.sc = build_scenario(r.cfg);
  r.dir = f.out.empty() ? fs::path(r.cfg.output_dir) : fs::path(f.out);

  // The snapshot points at a copy of the parameter file so the run directory
  // is self-contained.
  ScenarioConfig snap = r.cfg;
  snap.params_path = "params.snapshot";
  const std::string cfg_text = serialize_config(snap);
  write_text(r.dir / "config.snapshot", cfg_text);
  write_text(r.dir / "params.snapshot", r.sc.params_text);
  r.hash = sha256_hex(cfg_text + r.sc.params_text);

  r.manifest.command = command;
  r.manifest.config_hash = r.hash;
  r.manifest.seed = r.cfg.seed;
  r.manifest.clamp_current = r.cfg.controller.clamp_current;
  r.manifest.files = {"config.snapshot", "params.snapshot"};
  return r;
}

void finish(Run& r) { write_manifest(r.manifest, r.dir / "manifest.txt"); }

Trajectory model_free(Run& r, std::vector<Vec2>* theta_star = nullptr) {
  ControllerState cs(r.cfg.controller);
  RunOptions ro;
  if (r.cfg.compute_J_star || r.cfg.compute_ct || theta_star) {
    AnalysisOptions ao;
    ao.compute_J_star = r.cfg.compute_J_star || theta_star;
    ao.compute_ct = r.cfg.compute_ct;
    ro.observer = make_analysis_observer(ao, theta_star);
  }
  Trajectory t = run_closed_loop(*r.sc.model, cs, r.sc.spec, r.cfg.t_f, r.sc.x0, ro);
  t.seed = r.cfg.seed;
  t.config_hash = r.hash;
  return t;
}

Trajectory oracle(Run& r) {
  Trajectory t = oracle_trajectory(*r.sc.model, r.sc.spec, r.cfg.t_f, r.sc.x0);
  t.seed = r.cfg.seed;
  t.config_hash = r.hash;
  return t;
}

void write_traj(Run& r, const Trajectory& t, const std::string& stem) {
  write_trajectory_csv(*r.sc.model, t, r.dir / (stem + ".csv"));
  write_channels_csv(t, r.dir / (stem + "_channels.csv"));
  r.manifest.files.push_back(stem + ".csv");
  r.manifest.files.push_back(stem + "_channels.csv");
}

void plots(Run& r, const std::vector<std::pair<const Trajectory*, std::string>>& runs) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
  for (const auto& q : plot_quantities()) {
    std::vector<PlotSeries> s;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      auto part = series_for(*runs[k].first, q, runs[k].second, colors[k % 3], k > 0);
      s.insert(s.end(), part.begin(), part.end());
    }
    emit_svg(s, q, r.dir / (q + ".svg"), r.cfg.model);
    r.manifest.files.push_back(q + ".svg");
  }
}

std::string phase_text(const Trajectory& t) {
  std::ostringstream os;
  bool first = true;
  for (const auto& p : phases(t.active_sequence())) {
    os << (first ? "" : " ") << p.index + 1 << "@" << p.start;
    first = false;
  }
  return os.str();
}

int cmd_simulate(const Flags& f) {
  Run r = prepare(f, "simulate");
  Trajectory t = model_free(r);
  write_traj(r, t, "trajectory");
  if (f.svg) plots(r, {{&t, "model-free"}});
  r.manifest.notes.push_back({"phases", phase_text(t)});
  finish(r);
  std::cout << "simulate: " << t.size() << " steps, phases " << phase_text(t) << "\n";
  return kOk;
}

int cmd_oracle(const Flags& f) {
  Run r = prepare(f, "oracle");
  Trajectory t = oracle(r);
  write_traj(r, t, "trajectory");
  if (f.svg) plots(r, {{&t, "oracle"}});
  r.manifest.notes.push_back({"phases", phase_text(t)});
  finish(r);
  std::cout << "oracle: " << t.size() << " steps, phases " << phase_text(t) << "\n";
  return kOk;
}

int cmd_compare(const Flags& f) {
  Run r = prepare(f, "compare");
  Trajectory mf = model_free(r);
  Trajectory orc = oracle(r);
  write_traj(r, mf, "model_free");
  write_traj(r, orc, "oracle");
  std::ostringstream os;
  os << "t,u_free,u_oracle,gap\n";
  double num = 0, den = 0;
  for (std::size_t k = 0; k < mf.size(); ++k) {
    const double a = mf.records[k].u, b = orc.records[k].u;
    os << k << ',' << format_number(a) << ',' << format_number(b) << ',' << format_number(a - b) << '\n';
    num += (a - b) * (a - b);
    den += b * b;
  }
  write_text(r.dir / "gap.csv", os.str());
  r.manifest.files.push_back("gap.csv");
  if (f.svg) plots(r, {{&mf, "model-free"}, {&orc, "oracle"}});
  const double rel = den > 0 ? std::sqrt(num / den) : 0.0;
  r.manifest.notes.push_back({"phases_model_free", phase_text(mf)});
  r.manifest.notes.push_back({"phases_oracle", phase_text(orc)});
  r.manifest.notes.push_back({"rel_l2_u", format_number(rel)});
  finish(r);
  std::cout << "compare: model-free " << phase_text(mf) << " | oracle " << phase_text(orc) << " | rel L2(u) "
            << format_number(rel) << "\n";
  return kOk;
}

int cmd_montecarlo(const Flags& f) {
  Run r = prepare(f, "montecarlo");
  if (!r.sc.ecm) throw ConfigError("montecarlo needs model = ecm (got " + r.cfg.model + ")");
  RobustnessOptions ro;
  ro.n_models = r.cfg.mc_models;
  ro.fraction = r.cfg.mc_fraction;
  ro.seed = r.cfg.seed;
  ro.jobs = f.jobs;
  ro.controller = r.cfg.controller;
  RobustnessResult res = robustness_study(*r.sc.ecm, r.sc.spec, r.cfg.t_f, r.sc.x0, ro);

  const std::size_t p = r.sc.spec.size();
  std::ostringstream os;
  os << "model,Ro,R1,C1,R2,C2,Q,a,b,diverged,violated,violation_steps";
  for (std::size_t i = 0; i < p; ++i) os << ",depth_" << i + 1;
  os << ",suboptimality\n";
  for (const auto& m : res.models) {
    const auto& q = m.params;
    os << m.index;
    for (double v : {q.Ro, q.R1, q.C1, q.R2, q.C2, q.Q, q.a, q.b}) os << ',' << format_number(v);
    os << ',' << m.diverged << ',' << m.violated << ',' << m.violation_steps;
    for (double d : m.depth) os << ',' << format_number(d);
    os << ',' << format_number(m.suboptimality) << '\n';
  }
  write_text(r.dir / "summary.csv", os.str());
  r.manifest.files.push_back("summary.csv");
  write_traj(r, res.true_oracle, "oracle");
  if (res.model_free) write_traj(r, *res.model_free, "model_free");

  if (f.svg) {
    for (const std::string q : {"current", "voltage", "temperature"}) {
      std::vector<PlotSeries> s;
      bool labelled = false;
      for (const auto& m : res.models) {
        const auto& v = q == "current" ? m.u : q == "voltage" ? m.voltage : m.temperature;
        if (v.empty()) continue;
        PlotSeries ps;
        ps.label = labelled ? "" : "perturbed models";
        labelled = true;
        for (std::size_t k = 0; k < v.size(); ++k) ps.t.push_back(static_cast<double>(k));
        ps.v = v;
        ps.color = "#b0b0b0";
        ps.width = 0.8;
        s.push_back(std::move(ps));
      }
      auto add = [&](const Trajectory& t, const std::string& lab, const std::string& col, bool dash) {
        auto part = series_for(t, q, lab, col, dash);
        s.insert(s.end(), part.begin(), part.end());
      };
      if (res.model_free) add(*res.model_free, "model-free", "#1f77b4", false);
      add(res.true_oracle, "oracle (true model)", "#d62728", true);
      emit_svg(s, q, r.dir / (q + ".svg"), "ecm robustness");
      r.manifest.files.push_back(q + ".svg");
    }
  }

  const auto& st = res.stats;
  std::ostringstream depth;
  for (std::size_t i = 0; i < st.max_depth.size(); ++i) depth << (i ? " " : "") << format_number(st.max_depth[i]);
  r.manifest.notes.push_back({"models", std::to_string(res.models.size())});
  r.manifest.notes.push_back({"fraction", format_number(r.cfg.mc_fraction)});
  r.manifest.notes.push_back({"violating_runs", std::to_string(st.violating_runs)});
  r.manifest.notes.push_back({"diverged_runs", std::to_string(st.diverged_runs)});
  r.manifest.notes.push_back({"max_depth", depth.str()});
  r.manifest.notes.push_back({"max_suboptimality", format_number(st.max_suboptimality)});
  finish(r);
  std::cout << "montecarlo: " << res.models.size() << " models, " << st.violating_runs << " violating, "
            << st.diverged_runs << " diverged, max depth [" << depth.str() << "]\n";
  return kOk;
}

int cmd_regret(const Flags& f) {
  Run r = prepare(f, "regret");
  std::vector<double> sweep = f.mu1;
  if (sweep.empty()) sweep = {0.3, 0.5, 0.7, 0.9};
  std::ostringstream sum;
  sum << "mu1,slope,tail_gap_mean,final_R,converged,negative_gap,mu2_estimate,mu_star,ct_sign_changes\n";
  for (double mu : sweep) {
    r.cfg.controller.mu1 = mu;
    r.cfg.controller.validate();
    std::vector<Vec2> ts;
    Trajectory t = model_free(r, &ts);
    RegretReport rep = regret(t, mu, ts);
    std::ostringstream per;
    per << "t,gap,R\n";
    for (std::size_t k = 0; k < rep.gaps.size(); ++k)
      per << k << ',' << format_number(rep.gaps[k]) << ',' << format_number(rep.R[k]) << '\n';
    const std::string name = "regret_mu" + format_number(mu) + ".csv";
    write_text(r.dir / name, per.str());
    r.manifest.files.push_back(name);
    sum << format_number(mu) << ',' << format_number(rep.slope) << ',' << format_number(rep.tail_gap_mean) << ','
        << format_number(rep.R.empty() ? 0.0 : rep.R.back()) << ',' << rep.converged << ',' << rep.negative_gap
        << ',' << format_number(rep.mu2_estimate) << ',' << format_number(rep.mu_star) << ',' << rep.ct_sign_changes << '\n';
    std::cout << "regret mu1=" << mu << ": slope " << format_number(rep.slope) << ", tail gap "
              << format_number(rep.tail_gap_mean) << "\n";
  }
  write_text(r.dir / "regret_summary.csv", sum.str());
  r.manifest.files.push_back("regret_summary.csv");
  finish(r);
  return kOk;
}

int cmd_validate(const Flags& f) {
  Run r = prepare(f, "validate");
  std::vector<std::pair<std::string, bool>> checks;
  auto check = [&](const std::string& name, bool ok, const std::string& detail) {
    checks.push_back({name, ok});
    std::cout << (ok ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : ": " + detail) << "\n";
  };

  std::vector<Vec2> ts;
  Trajectory mf = model_free(r, &ts);
  Trajectory orc = oracle(r);
  write_traj(r, mf, "trajectory");
  write_traj(r, orc, "oracle");

  // Monotonicity on every 50th visited state over [0, u_hi].
  std::vector<State> xs;
  for (std::size_t k = 0; k < mf.states.size(); k += 50) xs.push_back(mf.states[k]);
  std::vector<double> grid;
  const double umax = r.sc.spec.ybar[0];
  for (int k = 0; k <= 20; ++k) grid.push_back(2.0 * umax * k / 20.0);
  const auto mono = validate_monotonicity(*r.sc.model, xs, grid);
  check("monotone outputs", mono.clean(), std::to_string(mono.flagged.size()) + " flagged");

  bool in_box = true, ct_pos = true, jstar_ok = true;
  for (const auto& rec : mf.records) {
    in_box = in_box && r.cfg.controller.box.contains(rec.theta);
    if (rec.c_t) ct_pos = ct_pos && *rec.c_t > 0;
    if (rec.J_star) jstar_ok = jstar_ok && *rec.J_star <= rec.J + 1e-9 * std::max(1.0, rec.J);
  }
  check("theta stays in box", in_box, "");
  check("c_t positive", ct_pos, "");
  check("J* <= J", jstar_ok, "");

  RegretReport rep = regret(mf, r.cfg.controller.mu1, ts);
  double acc = 0;
  bool sum_ok = true;
  for (std::size_t k = 0; k < rep.gaps.size(); ++k) {
    acc += rep.gaps[k];
    sum_ok = sum_ok && acc == rep.R[k];
  }
  check("regret cumulative sum", sum_ok, "");

  const RootConfig rc;
  const double gmax = r.sc.spec.gamma_max();
  double worst_attained = 0, worst_other = 0;
  for (std::size_t k = 0; k < orc.size(); ++k) {
    const auto& rec = orc.records[k];
    const auto i = rec.i_start;
    worst_attained = std::max(worst_attained, std::abs(rec.y[i] - r.sc.spec.ybar[i]));
    for (double e : rec.e) worst_other = std::max(worst_other, -e);
  }
  check("oracle attained constraint", worst_attained <= rc.tol_y, format_number(worst_attained));
  check("oracle feasibility", worst_other <= rc.tol_y * gmax, format_number(worst_other));

  // Schema of the fresh trajectory plus any files given with --csv.
  std::vector<fs::path> csvs{r.dir / "trajectory.csv"};
  for (const auto& c : f.csv) csvs.emplace_back(c);
  const auto golden = trajectory_columns(*r.sc.model);
  for (const auto& p : csvs) {
    const auto table = read_csv(p);
    std::string missing;
    for (const auto& c : golden)
      if (std::find(table.header.begin(), table.header.end(), c) == table.header.end()) missing += " " + c;
    check("csv schema " + p.filename().string(), missing.empty(), missing.empty() ? "" : "missing" + missing);
  }

  bool all = true;
  std::ostringstream rep_text;
  for (const auto& [n, ok] : checks) {
    rep_text << (ok ? "PASS " : "FAIL ") << n << "\n";
    all = all && ok;
  }
  write_text(r.dir / "validate.txt", rep_text.str());
  r.manifest.files.push_back("validate.txt");
  r.manifest.notes.push_back({"result", all ? "pass" : "fail"});
  finish(r);
  return all ? kOk : kValidate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bang-ride charging controller"};
  app.require_subcommand(1);
  Flags f;

  auto* sim = app.add_subcommand("simulate", "model-free closed-loop run");
  auto* orc = app.add_subcommand("oracle", "model-based ideal protocol");
  auto* cmp = app.add_subcommand("compare", "model-free and oracle runs plus gap.csv");
  auto* mc = app.add_subcommand("montecarlo", "perturbed-model robustness study (ecm)");
  auto* reg = app.add_subcommand("regret", "regret sweep over mu1");
  auto* val = app.add_subcommand("validate", "monotonicity, invariants and csv schema");
  for (auto* s : {sim, orc, cmp, mc, reg, val}) add_common(s, f);
  for (auto* s : {sim, orc, cmp, val}) s->add_option("--mu1", f.mu1, "step-size exponent")->expected(1);
  reg->add_option("--mu1", f.mu1, "step-size exponents to sweep")->expected(1, 64)->delimiter(',');
  val->add_option("--csv", f.csv, "existing trajectory csv to check against the schema")->check(CLI::ExistingFile);
  mc->add_option("--models", f.models, "number of perturbed models");
  mc->add_option("--fraction", f.fraction, "maximum relative perturbation");
  mc->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kConfig;
  }

  try {
    if (*sim) return cmd_simulate(f);
    if (*orc) return cmd_oracle(f);
    if (*cmp) return cmd_compare(f);
    if (*mc) return cmd_montecarlo(f);
    if (*reg) return cmd_regret(f);
    if (*val) return cmd_validate(f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kDiverged;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kDiverged;
  }
  return kConfig;
}
