#include "bangride/ecm.hpp"

#include <array>
#include <cmath>

#include "bangride/errors.hpp"
#include "bangride/rng.hpp"

namespace bangride {

void EcmParams::validate() const {
  const std::array<std::pair<const char*, double>, 9> pos{{{"Ro", Ro}, {"R1", R1}, {"C1", C1}, {"R2", R2},
                                                           {"C2", C2}, {"Q", Q}, {"a", a}, {"b", b}, {"dt", dt}}};
  for (const auto& [n, v] : pos)
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("ecm: ") + n + " must be > 0");
  auto in01 = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in01(1.0 - dt / (R1 * C1)) || !in01(1.0 - dt / (R2 * C2)))
    throw ConfigError("ecm: dt too large for the RC links (need 1 - dt/(R C) in (0, 1))");
  if (!in01(1.0 - a * dt)) throw ConfigError("ecm: need 1 - a dt in (0, 1)");
  if (!std::isfinite(v0) || !(k_ocv > 0.0)) throw ConfigError("ecm: OCV slope must be > 0");
}

EcmParams perturb_params(const EcmParams& base, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("perturbation fraction must lie in [0, 1)");
  EcmParams p = base;
  std::array<double*, 8> fields{&p.Ro, &p.R1, &p.R2, &p.C1, &p.C2, &p.Q, &p.a, &p.b};
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const double r = counter_uniform(seed, 0xEC3, k);
    *fields[k] *= 1.0 + fraction * (2.0 * r - 1.0);
  }
  return p;
}

EcmModel::EcmModel(const EcmParams& p) : p_(p) { p_.validate(); }

State EcmModel::step(const State& x, double u) const {
  const double dt = p_.dt;
  const double v1 = x[0], v2 = x[1], soc = x[2], dT = x[3];
  return {v1 + dt * (-v1 / (p_.R1 * p_.C1) + u / p_.C1),
          v2 + dt * (-v2 / (p_.R2 * p_.C2) + u / p_.C2),
          soc + dt * u / p_.Q,
          dT * (1.0 - p_.a * dt) + p_.b * dt * u * (p_.Ro * u + v1 + v2)};
}

double EcmModel::output(const State& x, double u, std::size_t i) const {
  switch (i) {
    case 0:
      return u;
    case 1:
      return (x[0] + x[1] + p_.k_ocv * x[2]) / p_.Ro + u;
    case 2:
      return x[3] * (1.0 - p_.a * p_.dt) + p_.b * p_.dt * (x[0] + x[1]) * u + p_.b * p_.dt * p_.Ro * u * u;
    default:
      throw std::out_of_range("ecm output index");
  }
}

void EcmModel::outputs(const State& x, double u, std::vector<double>& y) const {
  y.resize(3);
  for (std::size_t i = 0; i < 3; ++i) y[i] = output(x, u, i);
}

void EcmModel::aux(const State& x, double u, std::vector<double>& out) const {
  out = {x[2], p_.terminal_voltage(x[0], x[1], x[2], u), p_.Ta + x[3]};
}

}  // namespace bangride
