#include "bangride/spmet.hpp"

#include <array>
#include <cmath>

#include "bangride/errors.hpp"

namespace bangride {

void SpmetParams::validate() const {
  const std::array<std::pair<const char*, double>, 23> pos{{{"dt", dt},       {"F", F},           {"R", R},
                                                            {"Q_Ah", Q_Ah},   {"c_max", c_max},   {"G", G},
                                                            {"tau", tau},     {"D_neg", D_neg},   {"D_pos", D_pos},
                                                            {"L_neg", L_neg}, {"L_pos", L_pos},   {"eps_neg", eps_neg},
                                                            {"eps_pos", eps_pos}, {"N1_neg", N1_neg}, {"N1_pos", N1_pos},
                                                            {"N3_neg", N3_neg}, {"N3_pos", N3_pos}, {"Ve_neg", Ve_neg},
                                                            {"Ve_pos", Ve_pos}, {"a", a},         {"b", b},
                                                            {"k_neg", k_neg}, {"k_pos", k_pos}}};
  for (const auto& [n, v] : pos)
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("spmet: ") + n + " must be > 0");
  if (!(theta1 >= 0.0 && theta1 < theta2 && theta2 <= 1.0)) throw ConfigError("spmet: need 0 <= theta1 < theta2 <= 1");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("spmet: beta must lie in (0, 1)");
  if (Vp < 0.0) throw ConfigError("spmet: Vp must be >= 0 (0 derives it from Q_Ah)");
  if (R_e < 0.0) throw ConfigError("spmet: R_e must be >= 0");
  if (!(t_plus >= 0.0 && t_plus < 1.0)) throw ConfigError("spmet: t_plus must lie in [0, 1)");
  const double k = G * dt / (beta * (1.0 - beta) * tau);
  if (!(k > 0.0 && k < 1.0)) throw ConfigError("spmet: G dt / (beta (1 - beta) tau) must lie in (0, 1)");
  const double kn = dt * D_neg * N1_neg / (L_neg * eps_neg * N3_neg);
  const double kp = dt * D_pos * N1_pos / (L_pos * eps_pos * N3_pos);
  if (!(kn < 1.0 && kp < 1.0)) throw ConfigError("spmet: electrolyte relaxation per step must be < 1");
}

double SpmetParams::particle_volume() const {
  // Charge needed to move c_a from theta1 c_max to theta2 c_max equals Q.
  return Vp > 0.0 ? Vp : Q_Ah * 3600.0 / (F * c_max * (theta2 - theta1));
}

double spmet_soc(const SpmetParams& p, const State& x) {
  return (x[0] / p.c_max - p.theta1) / (p.theta2 - p.theta1);
}

double spmet_theta_pos(const SpmetParams& p, const State& x) {
  return p.thp_soc0 - spmet_soc(p, x) * (p.thp_soc0 - p.thp_soc1);
}

SpmetPotentials SpmetPotentials::defaults() {
  SpmetPotentials s;
  s.dU = [](const SpmetParams& p, const State& x) {
    const double thn = x[1] / p.c_max;  // surface stoichiometry
    const double thp = spmet_theta_pos(p, x);
    const double un = p.Un0 + p.Un1 * thn + p.Un2 * thn * thn;
    const double up = p.Up0 + p.Up1 * thp + p.Up2 * thp * thp;
    return up - un;
  };
  s.eta = [](const SpmetParams& p, const State& x, double u) {
    const double cs = x[1];
    const double thp = spmet_theta_pos(p, x);
    const double an = x[2] * cs * (p.c_max - cs);
    const double ap = x[3] * thp * (1.0 - thp);
    if (!(an > 0.0)) throw DomainError("eta", "negative exchange current argument (c_s or ce_neg out of range)");
    if (!(ap > 0.0)) throw DomainError("eta", "positive exchange current argument out of range");
    const double i0n = p.k_neg * std::sqrt(an);
    const double i0p = p.k_pos * std::sqrt(ap);
    const double TK = x[4] + 273.15;
    return 2.0 * p.R * TK / p.F * (std::asinh(u / (2.0 * i0n)) + std::asinh(u / (2.0 * i0p)));
  };
  s.phi_e = [](const SpmetParams& p, const State& x, double u) {
    if (!(x[2] > 0.0) || !(x[3] > 0.0)) throw DomainError("phi_e", "electrolyte concentration <= 0");
    const double TK = x[4] + 273.15;
    return p.R_e * u + 2.0 * p.R * TK / p.F * (1.0 - p.t_plus) * std::log(x[3] / x[2]);
  };
  return s;
}

SpmetModel::SpmetModel(const SpmetParams& p, SpmetPotentials pot) : p_(p), pot_(std::move(pot)) {
  p_.validate();
  vp_ = p_.particle_volume();
  const State x0 = initial_state(p_.theta1, p_.Ta);
  double prev = voltage(x0, 0.0);
  const int n = 200;
  for (int k = 1; k <= n; ++k) {
    const double u = p_.monotone_check_current * k / n;
    const double v = voltage(x0, u);
    if (!(v > prev)) throw ConfigError("spmet: voltage is not strictly increasing in u at " + std::to_string(u) + " A");
    prev = v;
  }
}

State SpmetModel::initial_state(double c_frac, double T0) const {
  return {c_frac * p_.c_max, c_frac * p_.c_max, p_.ce0, p_.ce0, T0};
}

double SpmetModel::voltage(const State& x, double u) const {
  return pot_.dU(p_, x) + pot_.eta(p_, x, u) + pot_.phi_e(p_, x, u);
}

State SpmetModel::step(const State& x, double u) const {
  const double dt = p_.dt;
  const double k = p_.G * dt / (p_.beta * (1.0 - p_.beta) * p_.tau);
  const double heat = (pot_.eta(p_, x, u) + pot_.phi_e(p_, x, u)) * u;
  return {x[0] + dt / (vp_ * p_.F) * u,
          k * x[0] + (1.0 - k) * x[1] + dt / (vp_ * p_.F * (1.0 - p_.beta)) * u,
          x[2] + dt * p_.D_neg * p_.N1_neg / (p_.L_neg * p_.eps_neg * p_.N3_neg) * (p_.ce0 - x[2]) +
              dt * p_.N2_neg / (p_.Ve_neg * p_.F * p_.N3_neg) * u,
          x[3] + dt * p_.D_pos * p_.N1_pos / (p_.L_pos * p_.eps_pos * p_.N3_pos) * (p_.ce0 - x[3]) +
              dt * p_.N2_pos / (p_.Ve_pos * p_.F * p_.N3_pos) * u,
          x[4] - p_.a * dt * (x[4] - p_.Ta) + p_.b * dt * heat};
}

double SpmetModel::output(const State& x, double u, std::size_t i) const {
  if (i == 0) return u;
  if (i == 1) return voltage(x, u);
  throw std::out_of_range("spmet output index");
}

void SpmetModel::outputs(const State& x, double u, std::vector<double>& y) const {
  y.assign({u, voltage(x, u)});
}

void SpmetModel::aux(const State& x, double u, std::vector<double>& out) const {
  out.assign({spmet_soc(p_, x), voltage(x, u), x[4]});
}

}  // namespace bangride
