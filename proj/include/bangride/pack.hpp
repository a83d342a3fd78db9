/**
 * @file pack.hpp
 * @brief Series pack of ECM cells with ring thermal coupling.
 *
 * Output layout (zero-based):
 *   0                 u
 *   1 .. N            per-cell voltage outputs K x_i + u
 *   N+1 .. 2N         per-cell one-step-ahead temperature deviations
 *   2N+1 ..           temperature differences: all ordered pairs (j, k), j != k,
 *                     j-major, or a single max-minus-min output.
 * The smallest weighted slack over the pair family is always attained by the
 * (hottest, coldest) pair, so both modes drive the selector identically.
 */
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bangride/ecm.hpp"
#include "bangride/plant.hpp"

namespace bangride {

enum class PairMode { AllPairs, MaxMinusMin };

struct PackParams {
  std::vector<EcmParams> cells;
  double k1 = 5e-4;  // 1/s, heat exchange with cell i-1
  double k2 = 5e-4;  // 1/s, heat exchange with cell i+1
  PairMode mode = PairMode::MaxMinusMin;

  std::size_t N() const { return cells.size(); }
  void validate() const;
};

// Cells share `base`; R1, C1, R2, C2 of each cell get an independent factor
// uniform in [1 - variation, 1 + variation] keyed by (seed, cell, parameter).
PackParams make_pack(const EcmParams& base, std::size_t N, double variation, std::uint64_t seed, double k1,
                     double k2, PairMode mode);

class PackModel : public PlantModel {
 public:
  explicit PackModel(const PackParams& p);

  std::string name() const override { return "pack"; }
  std::size_t state_dim() const override { return 4 * N_; }
  std::size_t output_count() const override;
  State step(const State& x, double u) const override;
  void outputs(const State& x, double u, std::vector<double>& y) const override;
  double output(const State& x, double u, std::size_t i) const override;
  double objective(const State& x) const override;

  std::size_t family_count() const override { return 4; }
  std::size_t family_of(std::size_t i) const override;
  std::vector<std::string> family_names() const override { return {"current", "voltage", "temperature", "dT"}; }

  std::vector<std::string> csv_output_names() const override { return {"y1", "V_pack", "T_max", "T_min", "dT_max"}; }
  void csv_outputs(const State& x, double u, const std::vector<double>& y, std::vector<double>& out) const override;

  std::vector<std::string> aux_names() const override {
    return {"soc", "voltage", "temperature_max", "temperature_min", "dT_max"};
  }
  void aux(const State& x, double u, std::vector<double>& out) const override;
  std::unique_ptr<PlantModel> clone() const override { return std::make_unique<PackModel>(*this); }

  std::size_t N() const { return N_; }
  const PackParams& params() const { return p_; }
  double cell_temperature_next(const State& x, double u, std::size_t i) const;
  double pack_voltage(const State& x, double u) const;
  // (j, k) of the all-pairs output at zero-based index i.
  std::pair<std::size_t, std::size_t> pair_of(std::size_t i) const;
  State initial_state(double soc0) const;

 private:
  PackParams p_;
  std::size_t N_;
};

}  // namespace bangride
