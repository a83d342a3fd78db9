/**
 * @file controller.hpp
 * @brief Model-free bang-ride controller: constraint errors, active-index
 *        switching, PI law and projected gradient updates on the PI gains.
 */
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace bangride {

using Vec2 = std::array<double, 2>;

struct ConstraintSpec {
  std::vector<double> ybar;   // upper bounds, ybar[0] = u_max
  std::vector<double> gamma;  // strictly positive weights

  std::size_t size() const { return ybar.size(); }
  double gamma_max() const;
  // Throws ConfigError on empty/mismatched vectors or non-positive weights.
  void validate() const;
};

// e_i = gamma_i (ybar_i - y_i)
std::vector<double> constraint_errors(const ConstraintSpec& spec, const std::vector<double>& y);
void constraint_errors(const ConstraintSpec& spec, const std::vector<double>& y, std::vector<double>& e);

// Zero-based index of the smallest error; ties go to the lowest index.
std::size_t active_index(const std::vector<double>& e);

struct Box {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{10.0, 1.0};

  bool contains(const Vec2& v) const;
  Vec2 project(const Vec2& v) const;
};

// alpha_0 = 1, alpha_t = t^-mu1. Throws ConfigError unless 0 < mu1 < 1.
double step_size(std::size_t t, double mu1);

struct ControllerConfig {
  Vec2 theta0{0.1, 0.1};
  Box box{};
  double mu1 = 0.5;
  std::optional<double> clip;  // gradient norm bound G
  bool clamp_current = false;  // hard clamp of u to [0, u_max]; off by default

  void validate() const;
};

struct ControlOutput {
  double u;
  Vec2 grad_u;  // d u / d theta = (last_error, error_sum)
};

class ControllerState {
 public:
  explicit ControllerState(const ControllerConfig& cfg);

  // u_t = theta_1 * last_error + theta_2 * error_sum. At t = 0 both are zero.
  ControlOutput control() const;

  // g = -e_active * grad_u, rescaled to norm <= G when a clip is set.
  Vec2 gradient(double e_active) const;

  // theta <- proj(theta - alpha g); statistics absorb (i_star, e_active).
  void update(const Vec2& g, double alpha, std::size_t i_star, double e_active);

  const Vec2& theta() const { return theta_; }
  const ControllerConfig& config() const { return cfg_; }
  double error_sum() const { return error_sum_; }
  double last_error() const { return last_error_; }
  std::size_t last_active() const { return last_active_; }
  std::size_t t() const { return t_; }

 private:
  ControllerConfig cfg_;
  Vec2 theta_;
  double error_sum_ = 0.0;
  double last_error_ = 0.0;
  std::size_t last_active_ = 0;  // i* = 1 before the first measurement
  std::size_t t_ = 0;
};

}  // namespace bangride
