#include "bangride/pack.hpp"

#include <algorithm>
#include <cmath>

#include "bangride/errors.hpp"
#include "bangride/rng.hpp"

namespace bangride {

void PackParams::validate() const {
  if (cells.size() < 2) throw ConfigError("pack: need at least 2 cells");
  if (!(k1 >= 0.0) || !(k2 >= 0.0)) throw ConfigError("pack: k1, k2 must be >= 0");
  for (const auto& c : cells) {
    c.validate();
    if (c.dt != cells[0].dt) throw ConfigError("pack: all cells must share dt");
  }
  if (mode == PairMode::AllPairs && cells.size() > 10)
    throw ConfigError("pack: all-pairs mode is limited to N <= 10 (use max-minus-min)");
}

PackParams make_pack(const EcmParams& base, std::size_t N, double variation, std::uint64_t seed, double k1,
                     double k2, PairMode mode) {
  if (!(variation >= 0.0 && variation < 1.0)) throw ConfigError("pack: variation must lie in [0, 1)");
  PackParams p;
  p.k1 = k1;
  p.k2 = k2;
  p.mode = mode;
  p.cells.assign(N, base);
  for (std::size_t i = 0; i < N; ++i) {
    double* f[4] = {&p.cells[i].R1, &p.cells[i].C1, &p.cells[i].R2, &p.cells[i].C2};
    for (std::size_t k = 0; k < 4; ++k) *f[k] *= 1.0 + variation * (2.0 * counter_uniform(seed, 0xCE11, 4 * i + k) - 1.0);
  }
  return p;
}

PackModel::PackModel(const PackParams& p) : p_(p), N_(p.N()) { p_.validate(); }

std::size_t PackModel::output_count() const {
  const std::size_t D = p_.mode == PairMode::AllPairs ? N_ * (N_ - 1) : 1;
  return 1 + 2 * N_ + D;
}

std::size_t PackModel::family_of(std::size_t i) const {
  if (i == 0) return 0;
  if (i <= N_) return 1;
  if (i <= 2 * N_) return 2;
  return 3;
}

std::pair<std::size_t, std::size_t> PackModel::pair_of(std::size_t i) const {
  const std::size_t q = i - (2 * N_ + 1);
  const std::size_t j = q / (N_ - 1);
  std::size_t k = q % (N_ - 1);
  if (k >= j) ++k;
  return {j, k};
}

double PackModel::cell_temperature_next(const State& x, double u, std::size_t i) const {
  const EcmParams& c = p_.cells[i];
  const double* xi = &x[4 * i];
  const double Tprev = x[4 * ((i + N_ - 1) % N_) + 3];
  const double Tnext = x[4 * ((i + 1) % N_) + 3];
  return xi[3] * (1.0 - c.a * c.dt) + c.b * c.dt * (xi[0] + xi[1]) * u + c.b * c.dt * c.Ro * u * u +
         c.dt * p_.k1 * (Tprev - xi[3]) + c.dt * p_.k2 * (Tnext - xi[3]);
}

State PackModel::step(const State& x, double u) const {
  State n(x.size());
  for (std::size_t i = 0; i < N_; ++i) {
    const EcmParams& c = p_.cells[i];
    const double* xi = &x[4 * i];
    n[4 * i + 0] = xi[0] + c.dt * (-xi[0] / (c.R1 * c.C1) + u / c.C1);
    n[4 * i + 1] = xi[1] + c.dt * (-xi[1] / (c.R2 * c.C2) + u / c.C2);
    n[4 * i + 2] = xi[2] + c.dt * u / c.Q;
    n[4 * i + 3] = cell_temperature_next(x, u, i);
  }
  return n;
}

double PackModel::output(const State& x, double u, std::size_t i) const {
  if (i == 0) return u;
  if (i <= N_) {
    const std::size_t c = i - 1;
    const EcmParams& e = p_.cells[c];
    return (x[4 * c] + x[4 * c + 1] + e.k_ocv * x[4 * c + 2]) / e.Ro + u;
  }
  if (i <= 2 * N_) return cell_temperature_next(x, u, i - N_ - 1);
  if (i >= output_count()) throw std::out_of_range("pack output index");
  if (p_.mode == PairMode::AllPairs) {
    const auto [j, k] = pair_of(i);
    return cell_temperature_next(x, u, j) - cell_temperature_next(x, u, k);
  }
  double hi = -INFINITY, lo = INFINITY;
  for (std::size_t c = 0; c < N_; ++c) {
    const double T = cell_temperature_next(x, u, c);
    hi = std::max(hi, T);
    lo = std::min(lo, T);
  }
  return hi - lo;
}

void PackModel::outputs(const State& x, double u, std::vector<double>& y) const {
  y.resize(output_count());
  y[0] = u;
  for (std::size_t i = 1; i <= 2 * N_; ++i) y[i] = output(x, u, i);
  const double* T = &y[N_ + 1];
  if (p_.mode == PairMode::AllPairs) {
    std::size_t q = 2 * N_ + 1;
    for (std::size_t j = 0; j < N_; ++j)
      for (std::size_t k = 0; k < N_; ++k)
        if (k != j) y[q++] = T[j] - T[k];
  } else {
    const auto [lo, hi] = std::minmax_element(T, T + N_);
    y[2 * N_ + 1] = *hi - *lo;
  }
}

double PackModel::objective(const State& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < N_; ++i) s += x[4 * i + 2];
  return s;
}

double PackModel::pack_voltage(const State& x, double u) const {
  double v = 0.0;
  for (std::size_t i = 0; i < N_; ++i) v += p_.cells[i].terminal_voltage(x[4 * i], x[4 * i + 1], x[4 * i + 2], u);
  return v;
}

void PackModel::csv_outputs(const State& x, double u, const std::vector<double>&, std::vector<double>& out) const {
  std::vector<double> a;
  aux(x, u, a);
  out.assign({u, a[1], a[2], a[3], a[4]});
}

void PackModel::aux(const State& x, double u, std::vector<double>& out) const {
  double hi = -INFINITY, lo = INFINITY;
  for (std::size_t c = 0; c < N_; ++c) {
    const double T = cell_temperature_next(x, u, c);
    hi = std::max(hi, T);
    lo = std::min(lo, T);
  }
  const double Ta = p_.cells[0].Ta;
  out.assign({objective(x) / static_cast<double>(N_), pack_voltage(x, u), Ta + hi, Ta + lo, hi - lo});
}

State PackModel::initial_state(double soc0) const {
  State x(4 * N_, 0.0);
  for (std::size_t i = 0; i < N_; ++i) x[4 * i + 2] = soc0;
  return x;
}

}  // namespace bangride
