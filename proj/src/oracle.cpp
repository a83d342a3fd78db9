#include "bangride/oracle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bangride/errors.hpp"

namespace bangride {

void RootConfig::validate(double u_max) const {
  if (!(tol_u > 0.0) || !(tol_y > 0.0)) throw ConfigError("root config: tolerances must be > 0");
  if (u_hi != 0.0 && !(u_hi >= u_max)) throw ConfigError("root config: u_hi must be >= u_max");
  if (max_iter == 0) throw ConfigError("root config: max_iter must be > 0");
}

bool FeedbackValue::infinite() const { return std::isinf(value); }

FeedbackValue solve_constraint(const PlantModel& model, const State& x, std::size_t i, double ybar,
                               const RootConfig& cfg, double u_max) {
  FeedbackValue fv;
  // Current bound: the root of u = ybar is ybar itself.
  if (i == 0) {
    fv.value = ybar;
    return fv;
  }
  double lo = 0.0, hi = cfg.bracket(u_max);
  const double h_hi = model.output(x, hi, i);
  if (h_hi < ybar) {
    fv.value = std::numeric_limits<double>::infinity();
    fv.residual = h_hi - ybar;
    return fv;
  }
  const double h_lo = model.output(x, lo, i);
  if (h_lo > ybar) {
    fv.value = 0.0;
    fv.residual = h_lo - ybar;
    fv.below_bracket = true;
    return fv;
  }
  double r_lo = h_lo - ybar;
  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    if (hi - lo <= cfg.tol_u && std::abs(r_lo) <= cfg.tol_y) {
      fv.value = lo;
      fv.residual = r_lo;
      return fv;
    }
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval exhausted in floating point
    const double r = model.output(x, mid, i) - ybar;
    if (r <= 0.0) {
      lo = mid;
      r_lo = r;
    } else {
      hi = mid;
    }
  }
  if (std::abs(r_lo) <= cfg.tol_y) {
    fv.value = lo;
    fv.residual = r_lo;
    return fv;
  }
  std::ostringstream os;
  os.precision(17);
  os << "bisection on output y" << i + 1 << " did not converge: bracket [" << lo << ", " << hi
     << "], residual at lo " << r_lo;
  throw NumericalError(os.str());
}

Selection selector(const PlantModel& model, const State& x, const ConstraintSpec& spec, const RootConfig& cfg) {
  Selection s;
  s.K.reserve(spec.size());
  s.u = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    s.K.push_back(solve_constraint(model, x, i, spec.ybar[i], cfg, spec.ybar[0]));
    if (s.K.back().value < s.u) {
      s.u = s.K.back().value;
      s.index = i;
    }
  }
  return s;
}

Trajectory oracle_trajectory(const PlantModel& model, const ConstraintSpec& spec, std::size_t t_f, const State& x0,
                             const RootConfig& cfg, double divergence_limit) {
  spec.validate();
  cfg.validate(spec.ybar[0]);
  if (spec.size() != model.output_count()) throw ConfigError("oracle: output count mismatch");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  Trajectory traj;
  traj.model = model.name();
  traj.kind = "oracle";
  traj.aux_names = model.aux_names();
  traj.records.reserve(t_f + 1);
  traj.states.reserve(t_f + 1);
  State x = x0;
  for (std::size_t t = 0; t <= t_f; ++t) {
    const Selection s = selector(model, x, spec, cfg);
    StepRecord rec;
    rec.t = t;
    rec.u = s.u;
    rec.theta = {nan, nan};
    rec.alpha = nan;
    model.outputs(x, s.u, rec.y);
    check_finite(t, s.u, rec.y, x, divergence_limit);
    constraint_errors(spec, rec.y, rec.e);
    rec.i_star = active_index(rec.e);
    rec.i_start = s.index;
    rec.J = rec.e[rec.i_star] * rec.e[rec.i_star];
    model.aux(x, s.u, rec.aux);
    traj.states.push_back(x);
    x = model.step(x, s.u);
    traj.records.push_back(std::move(rec));
  }
  return traj;
}

}  // namespace bangride
