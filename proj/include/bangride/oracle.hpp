/**
 * @file oracle.hpp
 * @brief Model-based ideal bang-ride protocol: per-constraint feedback values
 *        by bisection and the min-selector over them.
 */
#pragma once

#include <cstddef>
#include <vector>

#include "bangride/controller.hpp"
#include "bangride/plant.hpp"
#include "bangride/sim.hpp"

namespace bangride {

struct RootConfig {
  double u_hi = 0.0;  // 0 means 2 u_max
  double tol_u = 1e-9;
  double tol_y = 1e-6;
  std::size_t max_iter = 200;

  void validate(double u_max) const;
  double bracket(double u_max) const { return u_hi > 0.0 ? u_hi : 2.0 * u_max; }
};

struct FeedbackValue {
  double value = 0.0;  // +inf when the bound cannot be reached on [0, u_hi]
  double residual = 0.0;
  bool below_bracket = false;  // constraint already violated at u = 0
  bool infinite() const;
};

// Bisection on [0, u_hi] keeping h(lo) <= ybar < h(hi); returns the feasible
// end `lo` once hi - lo <= tol_u and |h(lo) - ybar| <= tol_y.
FeedbackValue solve_constraint(const PlantModel& model, const State& x, std::size_t i, double ybar,
                               const RootConfig& cfg, double u_max);

struct Selection {
  double u = 0.0;
  std::size_t index = 0;  // zero-based argmin over the feedback values
  std::vector<FeedbackValue> K;
};

Selection selector(const PlantModel& model, const State& x, const ConstraintSpec& spec, const RootConfig& cfg);

Trajectory oracle_trajectory(const PlantModel& model, const ConstraintSpec& spec, std::size_t t_f, const State& x0,
                             const RootConfig& cfg = {}, double divergence_limit = 1e9);

}  // namespace bangride
