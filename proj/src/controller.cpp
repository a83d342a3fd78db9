#include "bangride/controller.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bangride/errors.hpp"

namespace bangride {

double ConstraintSpec::gamma_max() const {
  return gamma.empty() ? 0.0 : *std::max_element(gamma.begin(), gamma.end());
}

void ConstraintSpec::validate() const {
  if (ybar.empty()) throw ConfigError("constraints: no outputs");
  if (ybar.size() != gamma.size())
    throw ConfigError("constraints: " + std::to_string(ybar.size()) + " bounds but " +
                      std::to_string(gamma.size()) + " weights");
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (!(gamma[i] > 0.0) || !std::isfinite(gamma[i]))
      throw ConfigError("constraints: weight " + std::to_string(i + 1) + " must be > 0");
    if (!std::isfinite(ybar[i]))
      throw ConfigError("constraints: bound " + std::to_string(i + 1) + " is not finite");
  }
  if (!(ybar[0] > 0.0)) throw ConfigError("constraints: u_max must be > 0");
}

void constraint_errors(const ConstraintSpec& spec, const std::vector<double>& y, std::vector<double>& e) {
  if (y.size() != spec.size())
    throw ConfigError("constraint_errors: " + std::to_string(y.size()) + " outputs, " +
                      std::to_string(spec.size()) + " bounds");
  e.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) e[i] = spec.gamma[i] * (spec.ybar[i] - y[i]);
}

std::vector<double> constraint_errors(const ConstraintSpec& spec, const std::vector<double>& y) {
  std::vector<double> e;
  constraint_errors(spec, y, e);
  return e;
}

std::size_t active_index(const std::vector<double>& e) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < e.size(); ++i)
    if (e[i] < e[best]) best = i;
  return best;
}

bool Box::contains(const Vec2& v) const {
  return v[0] >= lo[0] && v[0] <= hi[0] && v[1] >= lo[1] && v[1] <= hi[1];
}

Vec2 Box::project(const Vec2& v) const {
  return {std::clamp(v[0], lo[0], hi[0]), std::clamp(v[1], lo[1], hi[1])};
}

double step_size(std::size_t t, double mu1) {
  if (!(mu1 > 0.0 && mu1 < 1.0)) throw ConfigError("mu1 must lie in (0, 1), got " + std::to_string(mu1));
  if (t == 0) return 1.0;
  return std::pow(static_cast<double>(t), -mu1);
}

void ControllerConfig::validate() const {
  for (int k = 0; k < 2; ++k) {
    if (!std::isfinite(box.lo[k]) || !std::isfinite(box.hi[k]) || box.lo[k] > box.hi[k])
      throw ConfigError("theta box: component " + std::to_string(k + 1) + " has lo > hi or is not finite");
  }
  if (!box.contains(theta0)) throw ConfigError("theta0 lies outside the theta box");
  if (!(mu1 > 0.0 && mu1 < 1.0)) throw ConfigError("mu1 must lie in (0, 1)");
  if (clip && !(*clip > 0.0)) throw ConfigError("gradient clip must be > 0");
}

ControllerState::ControllerState(const ControllerConfig& cfg) : cfg_(cfg), theta_(cfg.theta0) {
  cfg_.validate();
}

ControlOutput ControllerState::control() const {
  const double u = theta_[0] * last_error_ + theta_[1] * error_sum_;
  return {u, {last_error_, error_sum_}};
}

Vec2 ControllerState::gradient(double e_active) const {
  Vec2 g{-e_active * last_error_, -e_active * error_sum_};
  if (cfg_.clip) {
    const double n = std::hypot(g[0], g[1]);
    if (n > *cfg_.clip) {
      const double s = *cfg_.clip / n;
      g[0] *= s;
      g[1] *= s;
    }
  }
  return g;
}

void ControllerState::update(const Vec2& g, double alpha, std::size_t i_star, double e_active) {
  theta_ = cfg_.box.project({theta_[0] - alpha * g[0], theta_[1] - alpha * g[1]});
  last_error_ = e_active;
  error_sum_ += e_active;
  last_active_ = i_star;
  ++t_;
}

}  // namespace bangride
