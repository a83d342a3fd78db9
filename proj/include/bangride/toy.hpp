/**
 * @file toy.hpp
 * @brief Scalar monotone linear plant x' = a x + b u with outputs
 *        h1 = u and h2 = c x + d u (d > 0).
 */
#pragma once

#include <memory>
#include <string>

#include "bangride/plant.hpp"

namespace bangride {

struct ToyParams {
  double a = 0.9;
  double b = 0.1;
  double c = 1.0;
  double d = 0.5;

  void validate() const;
};

class ToyLinearModel : public PlantModel {
 public:
  explicit ToyLinearModel(const ToyParams& p);

  std::string name() const override { return "toy-linear"; }
  std::size_t state_dim() const override { return 1; }
  std::size_t output_count() const override { return 2; }
  State step(const State& x, double u) const override { return {p_.a * x[0] + p_.b * u}; }
  void outputs(const State& x, double u, std::vector<double>& y) const override {
    y.assign({u, p_.c * x[0] + p_.d * u});
  }
  double output(const State& x, double u, std::size_t i) const override {
    return i == 0 ? u : p_.c * x[0] + p_.d * u;
  }
  double objective(const State& x) const override { return x[0]; }
  std::vector<std::string> family_names() const override { return {"current", "output"}; }
  std::vector<std::string> aux_names() const override { return {"x"}; }
  void aux(const State& x, double, std::vector<double>& out) const override { out.assign({x[0]}); }
  std::unique_ptr<PlantModel> clone() const override { return std::make_unique<ToyLinearModel>(*this); }

  const ToyParams& params() const { return p_; }

 private:
  ToyParams p_;
};

}  // namespace bangride
