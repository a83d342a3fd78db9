#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bangride/ecm.hpp"
#include "bangride/errors.hpp"
#include "bangride/sim.hpp"
#include "bangride/toy.hpp"

using namespace bangride;
using Catch::Approx;

namespace {

// x' = x + u, outputs (u, x + u).
class Integrator : public PlantModel {
 public:
  std::string name() const override { return "integrator"; }
  std::size_t state_dim() const override { return 1; }
  std::size_t output_count() const override { return 2; }
  State step(const State& x, double u) const override { return {x[0] + u}; }
  void outputs(const State& x, double u, std::vector<double>& y) const override { y.assign({u, x[0] + u}); }
  double objective(const State& x) const override { return x[0]; }
  std::unique_ptr<PlantModel> clone() const override { return std::make_unique<Integrator>(*this); }
};

// x_t = (10^t - 1) / 9 whatever the input.
class Runaway : public Integrator {
 public:
  State step(const State& x, double) const override { return {10.0 * x[0] + 1.0}; }
  void outputs(const State& x, double u, std::vector<double>& y) const override { y.assign({u, x[0]}); }
};

class NanOutput : public Integrator {
 public:
  void outputs(const State& x, double u, std::vector<double>& y) const override {
    y.assign({u, x[0] > 3.0 ? std::numeric_limits<double>::quiet_NaN() : x[0] + u});
  }
};

class Decreasing : public Integrator {
 public:
  void outputs(const State& x, double u, std::vector<double>& y) const override { y.assign({u, x[0] - u}); }
};

Trajectory ecm_run(std::size_t t_f) {
  EcmModel m(EcmParams{});
  ConstraintSpec s{{5.0, m.params().voltage_bound(4.04), 15.0}, {1.0, 1.0, 500.0}};
  ControllerConfig cc;
  cc.clip = 0.05;
  ControllerState cs(cc);
  return run_closed_loop(m, cs, s, t_f, {0.0, 0.0, 0.1, 0.0});
}

}  // namespace

TEST_CASE("integrator plant matches a hand execution of the loop", "[sim]") {
  const double ybar[2] = {10.0, 5.0};
  const std::size_t t_f = 60;

  // Line-by-line re-execution with plain scalars.
  struct Hand {
    double u, y2, e1, e2, th1, th2, alpha;
    int istar;
  };
  std::vector<Hand> hand;
  double x = 0.0, th1 = 0.1, th2 = 0.1, last = 0.0, sum = 0.0;
  for (std::size_t t = 0; t <= t_f; ++t) {
    const double u = th1 * last + th2 * sum;
    const double y2 = x + u;
    const double e1 = ybar[0] - u, e2 = ybar[1] - y2;
    const int istar = e2 < e1 ? 2 : 1;
    const double ea = istar == 1 ? e1 : e2;
    const double alpha = t == 0 ? 1.0 : std::pow(static_cast<double>(t), -0.5);
    hand.push_back({u, y2, e1, e2, th1, th2, alpha, istar});
    const double g1 = -ea * last, g2 = -ea * sum;
    th1 = std::min(10.0, std::max(0.0, th1 - alpha * g1));
    th2 = std::min(1.0, std::max(0.0, th2 - alpha * g2));
    last = ea;
    sum += ea;
    x = x + u;
  }

  Integrator m;
  ControllerState cs(ControllerConfig{});
  const Trajectory tr = run_closed_loop(m, cs, {{10.0, 5.0}, {1.0, 1.0}}, t_f, {0.0});
  REQUIRE(tr.size() == t_f + 1);
  for (std::size_t t = 0; t <= t_f; ++t) {
    const auto& r = tr.records[t];
    const auto& h = hand[t];
    INFO("t = " << t);
    CHECK(r.u == Approx(h.u).margin(1e-12));
    CHECK(r.y[1] == Approx(h.y2).margin(1e-12));
    CHECK(r.e[0] == Approx(h.e1).margin(1e-12));
    CHECK(r.e[1] == Approx(h.e2).margin(1e-12));
    CHECK(static_cast<int>(r.i_star) + 1 == h.istar);
    CHECK(r.theta[0] == Approx(h.th1).margin(1e-12));
    CHECK(r.theta[1] == Approx(h.th2).margin(1e-12));
    CHECK(r.alpha == Approx(h.alpha).epsilon(1e-15));
  }
  CHECK(cs.t() == t_f + 1);
}

TEST_CASE("t_f = 0 gives one record starting from constraint 1", "[sim]") {
  ToyLinearModel m(ToyParams{});
  ControllerState cs(ControllerConfig{});
  const auto tr = run_closed_loop(m, cs, {{100.0, 1.0}, {1.0, 1.0}}, 0, {0.0});
  REQUIRE(tr.size() == 1);
  CHECK(tr.records[0].i_start == 0);
  CHECK(tr.records[0].u == 0.0);
  CHECK(tr.states.size() == 1);
}

TEST_CASE("record invariants on the ECM run", "[sim][property]") {
  const auto tr = ecm_run(2000);
  EcmModel m(EcmParams{});
  const ConstraintSpec s{{5.0, m.params().voltage_bound(4.04), 15.0}, {1.0, 1.0, 500.0}};
  REQUIRE(tr.size() == 2001);
  double last = 0.0, sum = 0.0;
  for (std::size_t t = 0; t < tr.size(); ++t) {
    const auto& r = tr.records[t];
    REQUIRE(r.t == t);
    CHECK(r.y[0] == r.u);
    for (std::size_t i = 0; i < 3; ++i) REQUIRE(r.e[i] == s.gamma[i] * (s.ybar[i] - r.y[i]));
    REQUIRE(r.e[r.i_star] == *std::min_element(r.e.begin(), r.e.end()));
    for (std::size_t i = 0; i < r.i_star; ++i) REQUIRE(r.e[i] > r.e[r.i_star]);
    REQUIRE(r.J == r.e[r.i_star] * r.e[r.i_star]);
    // u_t recomputed from the recorded history and theta_t.
    REQUIRE(r.u == r.theta[0] * last + r.theta[1] * sum);
    if (t > 0) REQUIRE(r.i_start == tr.records[t - 1].i_star);
    last = r.e[r.i_star];
    sum += last;
  }
}

TEST_CASE("replaying the recorded current reproduces outputs bit for bit", "[sim][property]") {
  const auto tr = ecm_run(1500);
  EcmModel m(EcmParams{});
  const ConstraintSpec s{{5.0, m.params().voltage_bound(4.04), 15.0}, {1.0, 1.0, 500.0}};
  const auto rp = replay(m, s, tr.column_u(), {0.0, 0.0, 0.1, 0.0});
  REQUIRE(rp.size() == tr.size());
  for (std::size_t t = 0; t < tr.size(); ++t) {
    REQUIRE(rp.records[t].y == tr.records[t].y);
    REQUIRE(rp.states[t] == tr.states[t]);
    REQUIRE(rp.records[t].i_star == tr.records[t].i_star);
  }
  CHECK(std::isnan(rp.records[0].alpha));
}

TEST_CASE("common weight scaling leaves the replayed active sequence unchanged", "[sim][property]") {
  const auto tr = ecm_run(2000);
  EcmModel m(EcmParams{});
  ConstraintSpec s{{5.0, m.params().voltage_bound(4.04), 15.0}, {1.0, 1.0, 500.0}};
  const auto base = replay(m, s, tr.column_u(), {0.0, 0.0, 0.1, 0.0}).active_sequence();
  for (double c : {0.25, 3.0, 1024.0}) {
    ConstraintSpec sc = s;
    for (auto& g : sc.gamma) g *= c;
    CHECK(replay(m, sc, tr.column_u(), {0.0, 0.0, 0.1, 0.0}).active_sequence() == base);
  }
}

TEST_CASE("configuration errors", "[sim]") {
  ToyLinearModel m(ToyParams{});
  ControllerState cs(ControllerConfig{});
  CHECK_THROWS_AS(run_closed_loop(m, cs, {{1.0, 2.0, 3.0}, {1.0, 1.0, 1.0}}, 5, {0.0}), ConfigError);
  CHECK_THROWS_AS(run_closed_loop(m, cs, {{1.0, 2.0}, {1.0, 1.0}}, 5, {0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(run_closed_loop(m, cs, {{1.0, 2.0}, {1.0, -1.0}}, 5, {0.0}), ConfigError);
}

TEST_CASE("divergence guard carries the step index", "[sim]") {
  ControllerState cs(ControllerConfig{});
  Runaway r;
  try {
    run_closed_loop(r, cs, {{10.0, 5.0}, {1.0, 1.0}}, 100, {0.0});
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step == 10);  // x_10 > 1e9 > x_9
  }
  ControllerState cs2(ControllerConfig{});
  NanOutput n;
  CHECK_THROWS_AS(run_closed_loop(n, cs2, {{10.0, 5.0}, {1.0, 1.0}}, 100, {0.0}), DivergenceError);
  RunOptions ro;
  ro.divergence_limit = 1e3;
  ControllerState cs3(ControllerConfig{});
  try {
    run_closed_loop(r, cs3, {{10.0, 5.0}, {1.0, 1.0}}, 100, {0.0}, ro);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step == 4);  // x_4 = 1111
  }
}

TEST_CASE("monotonicity report", "[sim]") {
  EcmParams p;
  EcmModel m(p);
  std::vector<State> xs{{0, 0, 0.1, 0}, {0.05, 0.2, 0.5, 3.0}, {0.1, 0.3, 0.9, 12.0}};
  std::vector<double> grid{0.0, 0.5, 1.0, 2.5, 5.0, 10.0};
  const double d = 1e-6;
  const auto rep = validate_monotonicity(m, xs, grid, d);
  CHECK(rep.clean());
  CHECK(rep.min_slope[0] == Approx(1.0).epsilon(1e-8));
  CHECK(rep.min_slope[1] == Approx(1.0).epsilon(1e-8));
  // h3 slope b dt (Cx) + 2 b dt Ro u, plus b dt Ro delta from the forward difference.
  double expect = INFINITY;
  for (const auto& x : xs)
    for (double u : grid) expect = std::min(expect, p.b * p.dt * (x[0] + x[1]) + p.b * p.dt * p.Ro * (2 * u + d));
  CHECK(rep.min_slope[2] == Approx(expect).epsilon(1e-6));

  SECTION("negative Cx at u = 0 is flagged") {
    const auto r2 = validate_monotonicity(m, {{-0.2, -0.1, 0.5, 0.0}}, {0.0}, d);
    REQUIRE(r2.flagged == std::vector<std::size_t>{2});
  }
  SECTION("a decreasing output is flagged") {
    Decreasing dm;
    const auto r3 = validate_monotonicity(dm, {{0.0}}, {0.0, 1.0});
    CHECK(r3.flagged == std::vector<std::size_t>{1});
    CHECK(r3.min_slope[1] == Approx(-1.0));
  }
  CHECK_THROWS_AS(validate_monotonicity(m, {}, grid), ConfigError);
}

TEST_CASE("single binding constraint on a scalar linear plant converges", "[sim][property]") {
  ToyLinearModel m(ToyParams{});
  ControllerConfig cc;
  ControllerState cs(cc);
  const auto tr = run_closed_loop(m, cs, {{1e6, 1.0}, {1.0, 1.0}}, 3000, {0.0});
  for (std::size_t t = 1; t < tr.size(); ++t) REQUIRE(tr.records[t].i_star == 1);
  CHECK(std::abs(tr.records.back().e[1]) < 1e-8);
}

TEST_CASE("phases", "[sim]") {
  const auto p = phases({0, 0, 1, 1, 1, 2, 1});
  REQUIRE(p.size() == 4);
  CHECK(p[1].index == 1);
  CHECK(p[1].start == 2);
  CHECK(p[3].start == 6);
  CHECK(phases({}).empty());
}
