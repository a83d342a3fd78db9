/**
 * @file ecm.hpp
 * @brief Two-RC equivalent circuit cell with a lumped thermal state.
 *
 * State x = (v1, v2, SOC, T - Ta). Outputs:
 *   h1 = u
 *   h2 = K x + u              (terminal voltage scaled by 1/Ro, see below)
 *   h3 = x4 (1 - a dt) + b dt (C x) u + b dt Ro u^2
 *
 * The voltage output is kept additive in u by dividing the terminal voltage
 * v0 + k SOC + v1 + v2 + Ro u by Ro and dropping v0, so
 * K = (1/Ro, 1/Ro, k/Ro, 0) and the matching bound is (v_max - v0) / Ro.
 */
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include "bangride/plant.hpp"

namespace bangride {

struct EcmParams {
  double Ro = 0.02;      // ohm
  double R1 = 0.03;      // ohm
  double C1 = 2000.0;    // F
  double R2 = 0.035;     // ohm
  double C2 = 45000.0;   // F
  double Q = 9000.0;     // A s
  double a = 3.6e-4;     // 1/s
  double b = 0.017;      // K / (W s)
  double Ta = 25.0;      // degC
  double v0 = 3.6;       // OCV at SOC = 0 [V]
  double k_ocv = 0.375;  // OCV slope [V per unit SOC]
  double dt = 1.0;       // s

  // Throws ConfigError on non-positive constants or unstable discretization.
  void validate() const;

  std::array<double, 4> K() const { return {1.0 / Ro, 1.0 / Ro, k_ocv / Ro, 0.0}; }
  std::array<double, 4> C() const { return {1.0, 1.0, 0.0, 0.0}; }
  // Bound on h2 equivalent to a terminal-voltage limit.
  double voltage_bound(double v_max) const { return (v_max - v0) / Ro; }
  double terminal_voltage(double v1, double v2, double soc, double u) const {
    return v0 + k_ocv * soc + v1 + v2 + Ro * u;
  }
};

// Every one of Ro, R1, R2, C1, C2, Q, a, b is scaled by an independent factor
// uniform in [1 - fraction, 1 + fraction], drawn from a counter-based stream
// keyed by (seed, draw index). Throws ConfigError unless 0 <= fraction < 1.
EcmParams perturb_params(const EcmParams& base, double fraction, std::uint64_t seed);

class EcmModel : public PlantModel {
 public:
  explicit EcmModel(const EcmParams& p);

  std::string name() const override { return "ecm"; }
  std::size_t state_dim() const override { return 4; }
  std::size_t output_count() const override { return 3; }
  State step(const State& x, double u) const override;
  void outputs(const State& x, double u, std::vector<double>& y) const override;
  double output(const State& x, double u, std::size_t i) const override;
  double objective(const State& x) const override { return x[2]; }
  std::vector<std::string> family_names() const override { return {"current", "voltage", "temperature"}; }
  std::vector<std::string> aux_names() const override { return {"soc", "voltage", "temperature"}; }
  void aux(const State& x, double u, std::vector<double>& out) const override;
  std::unique_ptr<PlantModel> clone() const override { return std::make_unique<EcmModel>(*this); }

  const EcmParams& params() const { return p_; }

 private:
  EcmParams p_;
};

}  // namespace bangride
