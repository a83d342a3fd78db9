#include "bangride/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "bangride/errors.hpp"
#include "bangride/rng.hpp"

namespace bangride {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double weighted_sq(const PlantModel& model, const State& x, const ConstraintSpec& spec, std::size_t i, double u) {
  const double e = spec.gamma[i] * (spec.ybar[i] - model.output(x, u, i));
  return e * e;
}

}  // namespace

Vec2 min_norm_preimage(const Box& box, double L, double S, double u) {
  if (L == 0.0 && S == 0.0) return box.project({0.0, 0.0});

  auto fallback = [&]() {
    const Vec2 corners[4] = {{box.lo[0], box.lo[1]}, {box.lo[0], box.hi[1]}, {box.hi[0], box.lo[1]}, {box.hi[0], box.hi[1]}};
    Vec2 best = corners[0];
    double bd = kInf, bn = kInf;
    for (const auto& c : corners) {
      const double d = std::abs(c[0] * L + c[1] * S - u);
      const double n = std::hypot(c[0], c[1]);
      if (d < bd || (d == bd && n < bn)) {
        best = c;
        bd = d;
        bn = n;
      }
    }
    return best;
  };

  if (S == 0.0) {
    const double t1 = u / L;
    if (t1 < box.lo[0] || t1 > box.hi[0]) return fallback();
    return {t1, std::clamp(0.0, box.lo[1], box.hi[1])};
  }
  if (L == 0.0) {
    const double t2 = u / S;
    if (t2 < box.lo[1] || t2 > box.hi[1]) return fallback();
    return {std::clamp(0.0, box.lo[0], box.hi[0]), t2};
  }
  // theta2 = (u - L theta1) / S; restrict theta1 so theta2 stays in the box.
  const double a1 = (u - S * box.lo[1]) / L;
  const double a2 = (u - S * box.hi[1]) / L;
  const double lo = std::max(box.lo[0], std::min(a1, a2));
  const double hi = std::min(box.hi[0], std::max(a1, a2));
  if (lo > hi) return fallback();
  const double t1 = std::clamp(u * L / (L * L + S * S), lo, hi);
  return box.project({t1, (u - L * t1) / S});
}

OptimalCost per_step_optimal_cost(const PlantModel& model, const State& x, const ConstraintSpec& spec,
                                  double last_error, double error_sum, const Box& box, std::size_t i_star,
                                  double u_t, bool clamp, const RootConfig& cfg) {
  OptimalCost oc;
  const double L = last_error, S = error_sum;
  const double u_max = spec.ybar[0];
  auto cost = [&](double u) { return weighted_sq(model, x, spec, i_star, u); };

  if (L == 0.0 && S == 0.0) {
    oc.unreachable = true;
    oc.u_star = 0.0;
    oc.J_star = cost(0.0);
    oc.theta_star = box.project({0.0, 0.0});
    const double Jt = cost(u_t);
    if (Jt < oc.J_star) {
      oc.J_star = Jt;
      oc.u_star = u_t;
    }
    return oc;
  }

  const double c[4] = {box.lo[0] * L + box.lo[1] * S, box.lo[0] * L + box.hi[1] * S,
                       box.hi[0] * L + box.lo[1] * S, box.hi[0] * L + box.hi[1] * S};
  double ulo = *std::min_element(c, c + 4);
  double uhi = *std::max_element(c, c + 4);
  if (clamp) {
    ulo = std::clamp(ulo, 0.0, u_max);
    uhi = std::clamp(uhi, 0.0, u_max);
  }

  const double yb = spec.ybar[i_star];
  auto f = [&](double u) { return model.output(x, u, i_star) - yb; };
  double u_star;
  if (f(ulo) >= 0.0) {
    u_star = ulo;
  } else if (f(uhi) <= 0.0) {
    u_star = uhi;
  } else {
    double lo = ulo, hi = uhi;
    for (std::size_t it = 0; it < cfg.max_iter && hi - lo > cfg.tol_u; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (f(mid) <= 0.0 ? lo : hi) = mid;
    }
    u_star = std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
  }
  oc.u_star = u_star;
  oc.J_star = cost(u_star);
  const double Jt = cost(u_t);
  if (Jt < oc.J_star) {
    oc.J_star = Jt;
    oc.u_star = u_t;
  }
  oc.theta_star = min_norm_preimage(box, L, S, oc.u_star);
  return oc;
}

double mu_star(double mu1, double mu2) { return std::max({mu1, 1.0 - mu1, 1.0 + mu1 - mu2}); }

double loglog_slope(const std::vector<double>& v, std::size_t first) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t t = std::max<std::size_t>(first, 1); t < v.size(); ++t) {
    if (!(v[t] > 0.0)) continue;
    const double lx = std::log(static_cast<double>(t)), ly = std::log(v[t]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return kNaN;
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return kNaN;
  return (n * sxy - sx * sy) / den;
}

std::size_t tail_start(std::size_t n, std::size_t min_points) {
  const std::size_t half = n / 2;
  if (n - half >= min_points) return half;
  return n > min_points ? n - min_points : 0;
}

RegretReport regret(const Trajectory& traj, double mu1, const std::vector<Vec2>& theta_star, double neg_tol) {
  RegretReport r;
  r.mu1 = mu1;
  const std::size_t n = traj.size();
  if (n == 0) throw ConfigError("regret: empty trajectory");
  r.gaps.resize(n);
  r.R.resize(n);
  double acc = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& rec = traj.records[t];
    if (!rec.J_star) throw ConfigError("regret: J_star missing at step " + std::to_string(t));
    r.gaps[t] = rec.J - *rec.J_star;
    if (r.gaps[t] < -neg_tol) r.negative_gap = true;
    acc += r.gaps[t];
    r.R[t] = acc;
  }
  const std::size_t ts = tail_start(n);
  for (std::size_t t = std::max<std::size_t>(ts, 1); t < n; ++t)
    if (!(r.R[t] > 0.0)) r.converged = true;
  r.slope = r.converged ? kNaN : loglog_slope(r.R, ts);

  const std::size_t tail10 = std::max<std::size_t>(1, n / 10);
  double s = 0.0;
  for (std::size_t t = n - tail10; t < n; ++t) s += r.gaps[t];
  r.tail_gap_mean = s / static_cast<double>(tail10);

  r.mu2_estimate = kInf;
  if (theta_star.size() >= 2) {
    r.eps.resize(theta_star.size() - 1);
    for (std::size_t t = 0; t + 1 < theta_star.size(); ++t)
      r.eps[t] = std::hypot(theta_star[t + 1][0] - theta_star[t][0], theta_star[t + 1][1] - theta_star[t][1]);
    const double sl = loglog_slope(r.eps, tail_start(r.eps.size()));
    if (std::isfinite(sl)) r.mu2_estimate = -sl;
  }
  r.mu_star = mu_star(mu1, r.mu2_estimate);

  double prev_ratio = kNaN, prev_diff = 0.0;
  for (const auto& rec : traj.records) {
    if (!rec.c_t || !(rec.alpha > 0.0)) {
      prev_ratio = kNaN;
      continue;
    }
    const double ratio = *rec.c_t / rec.alpha;
    if (!std::isnan(prev_ratio)) {
      const double d = ratio - prev_ratio;
      if (d != 0.0) {
        if (prev_diff != 0.0 && (d > 0.0) != (prev_diff > 0.0)) ++r.ct_sign_changes;
        prev_diff = d;
      }
    }
    prev_ratio = ratio;
  }
  return r;
}

double ct_diagnostic(const PlantModel& model, const State& x, double u, std::size_t i_star, double gamma,
                     double delta) {
  if (i_star == 0) return 2.0 * gamma;
  const double d = (model.output(x, u + delta, i_star) - model.output(x, u - delta, i_star)) / (2.0 * delta);
  return 2.0 * gamma * d;
}

StepObserver make_analysis_observer(const AnalysisOptions& opts, std::vector<Vec2>* theta_star) {
  return [opts, theta_star](const StepContext& c, StepRecord& r) {
    if (opts.compute_J_star) {
      const auto& cc = c.controller;
      const OptimalCost oc = per_step_optimal_cost(c.model, c.x, c.spec, cc.last_error(), cc.error_sum(),
                                                   cc.config().box, r.i_star, r.u, cc.config().clamp_current, opts.root);
      r.J_star = oc.J_star;
      if (theta_star) theta_star->push_back(oc.theta_star);
    }
    if (opts.compute_ct) r.c_t = ct_diagnostic(c.model, c.x, r.u, r.i_star, c.spec.gamma[r.i_star], opts.ct_delta);
  };
}

std::uint64_t model_seed(std::uint64_t seed, std::size_t m) { return counter_draw(seed, 0x5EED, m); }

namespace {

double total_objective(const PlantModel& model, const Trajectory& t) {
  double s = 0.0;
  for (const auto& x : t.states) s += model.objective(x);
  return s;
}

}  // namespace

RobustnessResult robustness_study(const EcmParams& base, const ConstraintSpec& spec, std::size_t t_f, const State& x0,
                                  const RobustnessOptions& opts) {
  if (opts.n_models < 1) throw ConfigError("robustness study: need at least one model");
  if (!(opts.fraction >= 0.0 && opts.fraction < 1.0)) throw ConfigError("perturbation fraction must lie in [0, 1)");
  spec.validate();
  const EcmModel truth(base);
  RobustnessResult res;
  res.true_oracle = oracle_trajectory(truth, spec, t_f, x0, opts.root);
  const double best = total_objective(truth, res.true_oracle);
  const double viol_tol = spec.gamma_max() * opts.root.tol_y;
  const auto iv = *res.true_oracle.aux_index("voltage");
  const auto it = *res.true_oracle.aux_index("temperature");

  res.models.resize(opts.n_models);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t m = next++; m < opts.n_models; m = next++) {
      ModelOutcome& o = res.models[m];
      o.index = m;
      o.depth.assign(spec.size(), 0.0);
      try {
        o.params = perturb_params(base, opts.fraction, model_seed(opts.seed, m));
        const EcmModel pm(o.params);
        const Trajectory orc = oracle_trajectory(pm, spec, t_f, x0, opts.root);
        const Trajectory rep = replay(truth, spec, orc.column_u(), x0);
        for (const auto& rec : rep.records) {
          bool any = false;
          for (std::size_t i = 0; i < spec.size(); ++i) {
            o.depth[i] = std::max(o.depth[i], -rec.e[i]);
            if (-rec.e[i] > viol_tol) any = true;
          }
          if (any) ++o.violation_steps;
          o.u.push_back(rec.u);
          o.voltage.push_back(rec.aux[iv]);
          o.temperature.push_back(rec.aux[it]);
        }
        o.violated = o.violation_steps > 0;
        o.suboptimality = best - total_objective(truth, rep);
      } catch (const DivergenceError&) {
        o.diverged = true;
      } catch (const NumericalError&) {
        o.diverged = true;
      } catch (const ConfigError&) {
        o.diverged = true;
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(opts.jobs, opts.n_models));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ViolationStats& s = res.stats;
  s.max_depth.assign(spec.size(), 0.0);
  double sub_sum = 0.0;
  std::size_t ok = 0;
  for (const auto& o : res.models) {
    if (o.diverged) {
      ++s.diverged_runs;
      continue;
    }
    ++ok;
    for (std::size_t i = 0; i < spec.size(); ++i) s.max_depth[i] = std::max(s.max_depth[i], o.depth[i]);
    if (o.violated) ++s.violating_runs;
    s.violation_steps += o.violation_steps;
    s.max_suboptimality = std::max(s.max_suboptimality, o.suboptimality);
    sub_sum += o.suboptimality;
  }
  s.mean_suboptimality = ok ? sub_sum / static_cast<double>(ok) : 0.0;

  if (opts.controller) {
    ControllerState cs(*opts.controller);
    res.model_free = run_closed_loop(truth, cs, spec, t_f, x0);
  }
  return res;
}

}  // namespace bangride
