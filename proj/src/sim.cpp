#include "bangride/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bangride/errors.hpp"

namespace bangride {

std::vector<double> Trajectory::column_u() const {
  std::vector<double> u;
  u.reserve(records.size());
  for (const auto& r : records) u.push_back(r.u);
  return u;
}

std::vector<std::size_t> Trajectory::active_sequence() const {
  std::vector<std::size_t> s;
  s.reserve(records.size());
  for (const auto& r : records) s.push_back(r.i_star);
  return s;
}

std::optional<std::size_t> Trajectory::aux_index(const std::string& name) const {
  for (std::size_t i = 0; i < aux_names.size(); ++i)
    if (aux_names[i] == name) return i;
  return std::nullopt;
}

std::vector<double> Trajectory::column_aux(const std::string& name) const {
  const auto k = aux_index(name);
  if (!k) throw ConfigError("trajectory has no channel '" + name + "'");
  std::vector<double> v;
  v.reserve(records.size());
  for (const auto& r : records) v.push_back(r.aux.at(*k));
  return v;
}

std::vector<Phase> phases(const std::vector<std::size_t>& seq) {
  std::vector<Phase> p;
  for (std::size_t t = 0; t < seq.size(); ++t)
    if (p.empty() || p.back().index != seq[t]) p.push_back({seq[t], t});
  return p;
}

void check_finite(std::size_t t, double u, const std::vector<double>& y, const State& x, double limit) {
  if (!std::isfinite(u) || std::abs(u) > limit) throw DivergenceError(t, "input current " + std::to_string(u));
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!std::isfinite(y[i]) || std::abs(y[i]) > limit)
      throw DivergenceError(t, "output y" + std::to_string(i + 1) + " = " + std::to_string(y[i]));
  for (double v : x)
    if (!std::isfinite(v)) throw DivergenceError(t, "non-finite state");
}

Trajectory run_closed_loop(const PlantModel& model, ControllerState& controller, const ConstraintSpec& spec,
                           std::size_t t_f, const State& x0, const RunOptions& opts) {
  spec.validate();
  if (spec.size() != model.output_count())
    throw ConfigError("model " + model.name() + " has " + std::to_string(model.output_count()) +
                      " outputs, constraint set has " + std::to_string(spec.size()));
  if (x0.size() != model.state_dim()) throw ConfigError("initial state has wrong dimension");
  if (!controller.config().box.contains(controller.theta())) throw ConfigError("theta0 outside box");

  Trajectory traj;
  traj.model = model.name();
  traj.kind = "model-free";
  traj.clamp_current = controller.config().clamp_current;
  traj.aux_names = model.aux_names();
  traj.records.reserve(t_f + 1);
  traj.states.reserve(t_f + 1);

  State x = x0;
  for (std::size_t t = 0; t <= t_f; ++t) {
    StepRecord rec;
    rec.t = t;
    rec.theta = controller.theta();
    rec.i_start = controller.last_active();

    double u = controller.control().u;
    if (controller.config().clamp_current) u = std::clamp(u, 0.0, spec.ybar[0]);
    rec.u = u;

    model.outputs(x, u, rec.y);
    check_finite(t, u, rec.y, x, opts.divergence_limit);
    constraint_errors(spec, rec.y, rec.e);
    rec.i_star = active_index(rec.e);
    const double ea = rec.e[rec.i_star];
    rec.J = ea * ea;
    rec.alpha = step_size(controller.t(), controller.config().mu1);
    model.aux(x, u, rec.aux);

    if (opts.observer) opts.observer(StepContext{model, x, spec, controller}, rec);

    const Vec2 g = controller.gradient(ea);
    controller.update(g, rec.alpha, rec.i_star, ea);

    traj.states.push_back(x);
    x = model.step(x, u);
    traj.records.push_back(std::move(rec));
  }
  return traj;
}

Trajectory replay(const PlantModel& model, const ConstraintSpec& spec, const std::vector<double>& u,
                  const State& x0, double divergence_limit) {
  spec.validate();
  if (spec.size() != model.output_count()) throw ConfigError("replay: output count mismatch");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  Trajectory traj;
  traj.model = model.name();
  traj.kind = "replay";
  traj.aux_names = model.aux_names();
  traj.records.reserve(u.size());
  State x = x0;
  for (std::size_t t = 0; t < u.size(); ++t) {
    StepRecord rec;
    rec.t = t;
    rec.u = u[t];
    rec.theta = {nan, nan};
    rec.alpha = nan;
    model.outputs(x, u[t], rec.y);
    check_finite(t, u[t], rec.y, x, divergence_limit);
    constraint_errors(spec, rec.y, rec.e);
    rec.i_star = active_index(rec.e);
    rec.i_start = rec.i_star;
    rec.J = rec.e[rec.i_star] * rec.e[rec.i_star];
    model.aux(x, u[t], rec.aux);
    traj.states.push_back(x);
    x = model.step(x, u[t]);
    traj.records.push_back(std::move(rec));
  }
  return traj;
}

MonotonicityReport validate_monotonicity(const PlantModel& model, const std::vector<State>& states,
                                         const std::vector<double>& u_grid, double delta) {
  if (states.empty() || u_grid.empty()) throw ConfigError("validate_monotonicity: empty sample");
  MonotonicityReport rep;
  const std::size_t p = model.output_count();
  rep.min_slope.assign(p, std::numeric_limits<double>::infinity());
  std::vector<double> y0, y1;
  for (const auto& x : states) {
    for (double u : u_grid) {
      model.outputs(x, u, y0);
      model.outputs(x, u + delta, y1);
      for (std::size_t i = 0; i < p; ++i) {
        if (!std::isfinite(y0[i]) || !std::isfinite(y1[i]))
          throw NumericalError("validate_monotonicity: non-finite output y" + std::to_string(i + 1));
        rep.min_slope[i] = std::min(rep.min_slope[i], (y1[i] - y0[i]) / delta);
      }
    }
  }
  for (std::size_t i = 0; i < p; ++i)
    if (!(rep.min_slope[i] > 0.0)) rep.flagged.push_back(i);
  return rep;
}

}  // namespace bangride
