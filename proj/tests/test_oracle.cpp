#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "bangride/ecm.hpp"
#include "bangride/errors.hpp"
#include "bangride/oracle.hpp"
#include "bangride/scenario.hpp"
#include "bangride/toy.hpp"

using namespace bangride;
using Catch::Approx;

namespace {

// Outputs (u, x + u, tanh(u) - x). Each probe is logged.
class Probe : public PlantModel {
 public:
  mutable std::vector<std::pair<double, double>> log;  // (u, y2)
  std::string name() const override { return "probe"; }
  std::size_t state_dim() const override { return 1; }
  std::size_t output_count() const override { return 3; }
  State step(const State& x, double u) const override { return {x[0] + u}; }
  void outputs(const State& x, double u, std::vector<double>& y) const override {
    y.assign({u, x[0] + u, std::tanh(u) - x[0]});
  }
  double output(const State& x, double u, std::size_t i) const override {
    if (i == 1) log.push_back({u, x[0] + u});
    std::vector<double> y;
    outputs(x, u, y);
    return y[i];
  }
  double objective(const State& x) const override { return x[0]; }
  std::unique_ptr<PlantModel> clone() const override { return std::make_unique<Probe>(*this); }
};

// Jumps over the bound: no root to tolerance.
class Step : public Probe {
 public:
  void outputs(const State&, double u, std::vector<double>& y) const override {
    y.assign({u, u < 1.0 ? 0.0 : 10.0, 0.0});
  }
};

}  // namespace

TEST_CASE("feedback values", "[oracle]") {
  Probe m;
  const RootConfig rc;
  SECTION("current constraint returns the bound") {
    const auto k = solve_constraint(m, {0.0}, 0, 56.3739, rc, 56.3739);
    CHECK(k.value == 56.3739);
    CHECK_FALSE(k.infinite());
  }
  SECTION("affine root") {
    const auto k = solve_constraint(m, {1.0}, 1, 4.2, rc, 10.0);
    CHECK(k.value == Approx(3.2).margin(rc.tol_u));
    CHECK(k.value <= 3.2 + 1e-15);  // feasible side
    CHECK(std::abs(k.residual) <= rc.tol_y);
  }
  SECTION("unreachable bound is +inf") {
    const auto k = solve_constraint(m, {0.5}, 2, 0.7, rc, 10.0);
    CHECK(k.infinite());
    CHECK(k.value == std::numeric_limits<double>::infinity());
  }
  SECTION("bound already exceeded at zero current") {
    const auto k = solve_constraint(m, {5.0}, 1, 4.2, rc, 10.0);
    CHECK(k.value == 0.0);
    CHECK(k.below_bracket);
  }
  SECTION("iterates keep the bound bracketed") {
    m.log.clear();
    const auto k = solve_constraint(m, {0.25}, 1, 3.0, rc, 10.0);
    double lo = 0.0, hi = 20.0;
    for (const auto& [u, y] : m.log) {
      if (u <= lo || u >= hi) continue;  // bracket end probes
      (y <= 3.0 ? lo : hi) = u;
      REQUIRE(0.25 + lo <= 3.0);
      REQUIRE(0.25 + hi > 3.0);
    }
    CHECK(k.value == Approx(2.75).margin(rc.tol_u));
  }
  SECTION("discontinuous output is a numerical error") {
    Step s;
    CHECK_THROWS_AS(solve_constraint(s, {0.0}, 1, 5.0, rc, 10.0), NumericalError);
  }
}

TEST_CASE("root config validation", "[oracle]") {
  RootConfig rc;
  CHECK_NOTHROW(rc.validate(5.0));
  CHECK(rc.bracket(5.0) == 10.0);
  rc.u_hi = 3.0;
  CHECK_THROWS_AS(rc.validate(5.0), ConfigError);  // bracket must cover u_max
  rc = {};
  rc.tol_u = 0.0;
  CHECK_THROWS_AS(rc.validate(5.0), ConfigError);
}

TEST_CASE("selector", "[oracle]") {
  Probe m;
  const RootConfig rc;
  SECTION("smallest finite feedback value wins") {
    // K = (56.37, 40, +inf)
    const ConstraintSpec s{{56.37, 40.0, 1.5}, {1.0, 1.0, 1.0}};
    const auto sel = selector(m, {0.0}, s, rc);
    CHECK(sel.K[0].value == 56.37);
    CHECK(sel.K[1].value == Approx(40.0).margin(rc.tol_u));
    CHECK(sel.K[2].infinite());
    CHECK(sel.u == sel.K[1].value);
    CHECK(sel.index == 1);
  }
  SECTION("only the current bound is finite") {
    const ConstraintSpec s{{5.0, 1e6, 1.5}, {1.0, 1.0, 1.0}};
    const auto sel = selector(m, {0.0}, s, rc);
    CHECK(sel.u == 5.0);
    CHECK(sel.index == 0);
  }
}

TEST_CASE("integrator plant oracle rides y2 exactly", "[oracle]") {
  Probe m;
  const ConstraintSpec s{{10.0, 5.0, 2.0}, {1.0, 1.0, 1.0}};
  const auto tr = oracle_trajectory(m, s, 30, {0.0});
  for (std::size_t t = 0; t < tr.size(); ++t) {
    const double x = tr.states[t][0];
    const double k2 = 5.0 - x;
    const double expect = std::min(10.0, std::max(0.0, k2));
    CHECK(tr.records[t].u == Approx(expect).margin(2e-9));
  }
  CHECK(tr.kind == "oracle");
}

TEST_CASE("selector equals the feasible maximum on a grid", "[oracle][property]") {
  ToyLinearModel m(ToyParams{});
  const ConstraintSpec s{{2.0, 1.0}, {1.0, 1.0}};
  const RootConfig rc;
  const std::size_t n = 10000;
  const double du = 2.0 / (n - 1);
  for (double x : {-3.0, -0.5, 0.0, 0.2, 0.5, 0.8, 0.99}) {
    double best = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double u = k * du;
      if (u <= 2.0 + rc.tol_y && x + 0.5 * u <= 1.0 + rc.tol_y) best = u;
    }
    const auto sel = selector(m, {x}, s, rc);
    INFO("x = " << x);
    CHECK(std::abs(sel.u - best) <= du + rc.tol_u);
  }
}

TEST_CASE("oracle phase structure on the shipped scenarios", "[oracle]") {
  auto idx = [](const Trajectory& tr) {
    std::vector<std::size_t> v;
    for (const auto& p : phases(tr.active_sequence())) v.push_back(p.index);
    return v;
  };
  SECTION("spmet: current then voltage") {
    const auto cfg = load_config(std::string(CONFIG_DIR) + "/spmet.cfg");
    const auto sc = build_scenario(cfg);
    const auto tr = oracle_trajectory(*sc.model, sc.spec, cfg.t_f, sc.x0);
    CHECK(idx(tr) == std::vector<std::size_t>{0, 1});
  }
  SECTION("ecm: 1, 2, 3, 2") {
    const auto cfg = load_config(std::string(CONFIG_DIR) + "/ecm.cfg");
    const auto sc = build_scenario(cfg);
    const auto tr = oracle_trajectory(*sc.model, sc.spec, cfg.t_f, sc.x0);
    CHECK(idx(tr) == std::vector<std::size_t>{0, 1, 2, 1});

    const double gmax = sc.spec.gamma_max(), tol = RootConfig{}.tol_y;
    for (const auto& r : tr.records) {
      double mn = INFINITY;
      for (double e : r.e) {
        REQUIRE(e >= -gmax * tol);
        mn = std::min(mn, e);
      }
      REQUIRE(mn <= gmax * tol);  // some constraint is ridden
      REQUIRE(std::abs(r.y[r.i_start] - sc.spec.ybar[r.i_start]) <= tol);
      REQUIRE(std::isnan(r.theta[0]));
    }
  }
}
