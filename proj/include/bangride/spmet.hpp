/**
 * @file spmet.hpp
 * @brief Single-particle model with electrolyte and thermal states.
 *
 * State x = (c_a, c_s, ce_neg, ce_pos, T): average and surface concentration in
 * the negative particle [mol/m^3], electrolyte concentrations [mol/m^3] and
 * cell temperature [degC]. Outputs y = (u, V).
 */
#pragma once

#include <functional>
#include <memory>
#include <string>

#include "bangride/plant.hpp"

namespace bangride {

struct SpmetParams {
  double dt = 1.0;                // s
  double F = 96485.33212;         // C/mol
  double R = 8.314462618;         // J/(mol K)
  double Q_Ah = 28.18695;         // capacity [A h]; u_max = 2Q
  double c_max = 31080.0;         // mol/m^3
  double theta1 = 0.1;            // stoichiometry at SOC 0
  double theta2 = 0.9;            // stoichiometry at SOC 1
  double Vp = 0.0;                // particle volume [m^3]; 0 = derive from Q_Ah
  double G = 4.2;                 // hydraulic model constants
  double beta = 0.7;
  double tau = 1000.0;            // s
  double D_neg = 3e-10, D_pos = 3e-10;     // m^2/s
  double L_neg = 8e-5, L_pos = 8e-5;       // m
  double eps_neg = 0.3, eps_pos = 0.3;
  double N1_neg = 4000.0, N1_pos = 4000.0;
  double N2_neg = -0.085872, N2_pos = 0.085872;
  double N3_neg = 1.0, N3_pos = 1.0;
  double Ve_neg = 1e-5, Ve_pos = 1e-5;     // m^3
  double ce0 = 1200.0;            // electrolyte rest concentration
  double a = 1e-3;                // 1/s
  double b = 1.7e-3;              // K/(W s)
  double Ta = 25.0;               // degC

  // Default potential functions.
  double Un0 = 0.5, Un1 = -0.9, Un2 = 0.45;   // U_neg(th) = Un0 + Un1 th + Un2 th^2
  double Up0 = 4.9, Up1 = -1.5, Up2 = 0.25;   // U_pos(th) likewise
  double thp_soc0 = 0.95, thp_soc1 = 0.45;    // positive stoichiometry at SOC 0 and 1
  double k_neg = 5.6e-5;                      // exchange-current prefactors
  double k_pos = 1.7;
  double R_e = 1.5e-3;                        // ohm, electrolyte ohmic term
  double t_plus = 0.38;

  double monotone_check_current = 120.0;      // A, upper end of the construction-time sweep

  void validate() const;
  double particle_volume() const;
};

double spmet_soc(const SpmetParams& p, const State& x);
// Positive-particle stoichiometry from the mass balance (SOC-linear).
double spmet_theta_pos(const SpmetParams& p, const State& x);

// Pluggable potential differences. Each may throw DomainError naming itself.
struct SpmetPotentials {
  std::function<double(const SpmetParams&, const State&)> dU;
  std::function<double(const SpmetParams&, const State&, double)> eta;
  std::function<double(const SpmetParams&, const State&, double)> phi_e;

  static SpmetPotentials defaults();
};

class SpmetModel : public PlantModel {
 public:
  explicit SpmetModel(const SpmetParams& p, SpmetPotentials pot = SpmetPotentials::defaults());

  std::string name() const override { return "spmet"; }
  std::size_t state_dim() const override { return 5; }
  std::size_t output_count() const override { return 2; }
  State step(const State& x, double u) const override;
  void outputs(const State& x, double u, std::vector<double>& y) const override;
  double output(const State& x, double u, std::size_t i) const override;
  double objective(const State& x) const override { return spmet_soc(p_, x); }
  std::vector<std::string> family_names() const override { return {"current", "voltage"}; }
  std::vector<std::string> aux_names() const override { return {"soc", "voltage", "temperature"}; }
  void aux(const State& x, double u, std::vector<double>& out) const override;
  std::unique_ptr<PlantModel> clone() const override { return std::make_unique<SpmetModel>(*this); }

  double voltage(const State& x, double u) const;
  // (c_a, c_s, ce, ce, T) at the given initial stoichiometry fraction of c_max.
  State initial_state(double c_frac, double T0) const;
  const SpmetParams& params() const { return p_; }

 private:
  SpmetParams p_;
  double vp_;
  SpmetPotentials pot_;
};

}  // namespace bangride
