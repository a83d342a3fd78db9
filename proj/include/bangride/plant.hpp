/**
 * @file plant.hpp
 * @brief Discrete-time plant contract shared by all battery models.
 */
#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace bangride {

using State = std::vector<double>;

class PlantModel {
 public:
  virtual ~PlantModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t output_count() const = 0;

  virtual State step(const State& x, double u) const = 0;
  // y must come back with output_count() entries; y[0] is u itself.
  virtual void outputs(const State& x, double u, std::vector<double>& y) const = 0;

  // Single output. Models with many outputs override this so the oracle does
  // not pay for the whole vector on every bisection probe.
  virtual double output(const State& x, double u, std::size_t i) const;

  // Stage reward L(x) the charging problem maximizes (state of charge).
  virtual double objective(const State& x) const = 0;

  // Outputs sharing a family share one bound and one weight in scenario files.
  // Default: every output is its own family.
  virtual std::size_t family_count() const { return output_count(); }
  virtual std::size_t family_of(std::size_t i) const { return i; }
  virtual std::vector<std::string> family_names() const;

  // Columns written in place of y_1..y_p in trajectory CSVs.
  virtual std::vector<std::string> csv_output_names() const;
  virtual void csv_outputs(const State& x, double u, const std::vector<double>& y,
                           std::vector<double>& out) const;

  // Physical channels for plots: soc, voltage [V], temperature [degC or K].
  virtual std::vector<std::string> aux_names() const { return {}; }
  virtual void aux(const State& x, double u, std::vector<double>& out) const { out.clear(); (void)x; (void)u; }

  virtual std::unique_ptr<PlantModel> clone() const = 0;
};

}  // namespace bangride
