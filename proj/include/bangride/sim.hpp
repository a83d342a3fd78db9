/**
 * @file sim.hpp
 * @brief Closed-loop simulation and trajectory records.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bangride/controller.hpp"
#include "bangride/plant.hpp"

namespace bangride {

// Indices (i_star, i_start) are zero-based here; CSV output is one-based.
struct StepRecord {
  std::size_t t = 0;
  double u = 0.0;
  std::vector<double> y;
  std::vector<double> e;
  std::size_t i_star = 0;
  // Closed loop: active index carried into the step (0 before any data).
  // Oracle: index of the feedback value that attained the min.
  std::size_t i_start = 0;
  Vec2 theta{};
  double alpha = 0.0;
  double J = 0.0;
  std::optional<double> J_star;
  std::optional<double> c_t;
  std::vector<double> aux;
};

struct Trajectory {
  std::vector<StepRecord> records;
  std::vector<State> states;  // x_t at the start of each record
  std::string model;
  std::string kind;  // "model-free" or "oracle"
  std::uint64_t seed = 0;
  std::string config_hash;
  bool clamp_current = false;
  std::vector<std::string> aux_names;

  std::size_t size() const { return records.size(); }
  std::vector<double> column_u() const;
  std::vector<std::size_t> active_sequence() const;
  std::optional<std::size_t> aux_index(const std::string& name) const;
  std::vector<double> column_aux(const std::string& name) const;
};

// Run of consecutive equal values: (value, first step).
struct Phase {
  std::size_t index;
  std::size_t start;
};
std::vector<Phase> phases(const std::vector<std::size_t>& seq);

struct StepContext {
  const PlantModel& model;
  const State& x;
  const ConstraintSpec& spec;
  const ControllerState& controller;  // before this step's update
};
using StepObserver = std::function<void(const StepContext&, StepRecord&)>;

struct RunOptions {
  double divergence_limit = 1e9;
  StepObserver observer;
};

// Algorithm order per step: u from the PI law, observe y, pick i*, form g,
// projected step on theta, append (i*, e_{i*}) to the history statistics.
Trajectory run_closed_loop(const PlantModel& model, ControllerState& controller, const ConstraintSpec& spec,
                           std::size_t t_f, const State& x0, const RunOptions& opts = {});

// Applies a recorded current sequence open loop. Errors and i* are recomputed
// against `spec`; theta/alpha fields are NaN.
Trajectory replay(const PlantModel& model, const ConstraintSpec& spec, const std::vector<double>& u,
                  const State& x0, double divergence_limit = 1e9);

struct MonotonicityReport {
  std::vector<double> min_slope;  // per output
  std::vector<std::size_t> flagged;
  bool clean() const { return flagged.empty(); }
};

MonotonicityReport validate_monotonicity(const PlantModel& model, const std::vector<State>& states,
                                         const std::vector<double>& u_grid, double delta = 1e-6);

// Shared guard used by the loop and the oracle.
void check_finite(std::size_t t, double u, const std::vector<double>& y, const State& x, double limit);

}  // namespace bangride
