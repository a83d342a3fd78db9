/**
 * @file analysis.hpp
 * @brief Regret accounting, per-step optimal cost, c_t diagnostics and the
 *        perturbed-model robustness study.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bangride/controller.hpp"
#include "bangride/ecm.hpp"
#include "bangride/oracle.hpp"
#include "bangride/sim.hpp"

namespace bangride {

struct OptimalCost {
  double J_star = 0.0;
  double u_star = 0.0;
  Vec2 theta_star{};      // minimum-norm minimizer in the box
  bool unreachable = false;  // both history statistics zero
};

// Minimizes (gamma_i (ybar_i - h_i(x, u)))^2 over the image of the box under
// u = th1 * last_error + th2 * error_sum, with x and the history frozen.
// `u_t` is the realized current, which always lies in that image and is kept
// as a candidate. With `clamp` the image is clamped to [0, u_max] too.
OptimalCost per_step_optimal_cost(const PlantModel& model, const State& x, const ConstraintSpec& spec,
                                  double last_error, double error_sum, const Box& box, std::size_t i_star,
                                  double u_t, bool clamp = false, const RootConfig& cfg = {});

// Closest point to the origin on {theta in box : w . theta = u}. Falls back to
// the nearest box corner in value when rounding leaves the set empty.
Vec2 min_norm_preimage(const Box& box, double L, double S, double u);

struct RegretReport {
  std::vector<double> gaps;  // J_t - J*_t
  std::vector<double> R;     // cumulative regret
  double slope = 0.0;        // tail log-log slope of R_t; NaN if undefined
  bool converged = false;    // R_t <= 0 somewhere in the tail
  bool negative_gap = false; // some gap below -tol
  double tail_gap_mean = 0.0;  // mean gap over the last 10 %
  double mu1 = 0.5;
  double mu2_estimate = 0.0;   // +inf when theta* never moves in the tail
  double mu_star = 0.5;
  std::vector<double> eps;     // |theta*_{t+1} - theta*_t|, may be empty
  // Sign changes of c_{t+1}/alpha_{t+1} - c_t/alpha_t over steps with c_t.
  // Logged only.
  std::size_t ct_sign_changes = 0;
};

double mu_star(double mu1, double mu2);

// Least squares slope of log(v_t) against log(t) over t in [first, v.size()),
// skipping t = 0 and non-positive v_t.
double loglog_slope(const std::vector<double>& v, std::size_t first);

// Tail window start: last half of the horizon but at least `min_points`.
std::size_t tail_start(std::size_t n, std::size_t min_points = 100);

RegretReport regret(const Trajectory& traj, double mu1, const std::vector<Vec2>& theta_star = {},
                    double neg_tol = 1e-9);

// 2 gamma_i dh_i/du by central difference; exactly 2 gamma_1 for i = 0.
double ct_diagnostic(const PlantModel& model, const State& x, double u, std::size_t i_star, double gamma,
                     double delta = 1e-6);

struct AnalysisOptions {
  bool compute_J_star = true;
  bool compute_ct = true;
  double ct_delta = 1e-6;
  RootConfig root{};
};

// Observer for run_closed_loop that fills J_star / c_t and, if `theta_star`
// is given, appends the per-step minimum-norm minimizer.
StepObserver make_analysis_observer(const AnalysisOptions& opts, std::vector<Vec2>* theta_star = nullptr);

struct ModelOutcome {
  std::size_t index = 0;
  EcmParams params;
  bool diverged = false;
  bool violated = false;
  std::vector<double> depth;  // per constraint, max_t (-e_{i,t})^+
  std::size_t violation_steps = 0;
  double suboptimality = 0.0;  // true-oracle objective minus achieved
  std::vector<double> u;
  std::vector<double> voltage;
  std::vector<double> temperature;
};

struct ViolationStats {
  std::vector<double> max_depth;  // per constraint
  std::size_t violating_runs = 0;
  std::size_t diverged_runs = 0;
  std::size_t violation_steps = 0;
  double max_suboptimality = 0.0;
  double mean_suboptimality = 0.0;
};

struct RobustnessResult {
  std::vector<ModelOutcome> models;
  ViolationStats stats;
  Trajectory true_oracle;
  std::optional<Trajectory> model_free;
};

struct RobustnessOptions {
  std::size_t n_models = 200;
  double fraction = 0.1;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  RootConfig root{};
  std::optional<ControllerConfig> controller;  // also run the model-free loop on the true model
};

// For each perturbed model: oracle protocol on the perturbed model, applied
// open loop to the true model. A constraint counts as violated when
// -e_i exceeds gamma_max * tol_y.
RobustnessResult robustness_study(const EcmParams& base, const ConstraintSpec& spec, std::size_t t_f, const State& x0,
                                  const RobustnessOptions& opts);

// Seed used for model m of a study keyed by `seed`.
std::uint64_t model_seed(std::uint64_t seed, std::size_t m);

}  // namespace bangride
