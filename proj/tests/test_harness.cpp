#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "bangride/config.hpp"
#include "bangride/errors.hpp"
#include "bangride/output.hpp"
#include "bangride/scenario.hpp"
#include "bangride/sim.hpp"

using namespace bangride;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

const char* kToy = R"(
[scenario]
model = toy-linear
params = toy.params
t_f = 40
dt = 1

[constraints]
bounds = 100, 1
gamma = 1, 1

[controller]
theta0 = 0.1, 0.1
mu1 = 0.5
)";

const char* kToyParams = "[toy]\na = 0.9\nb = 0.1\nc = 1\nd = 0.5\n[initial]\nx = 0\n";

std::string cfg_path(const std::string& name) { return std::string(CONFIG_DIR) + "/" + name; }

Trajectory run(const Scenario& sc, std::size_t t_f) {
  ControllerState cs(sc.cfg.controller);
  return run_closed_loop(*sc.model, cs, sc.spec, t_f, sc.x0);
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("bangride_harness_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::size_t b = 0;
  for (std::size_t e; (e = s.find('\n', b)) != std::string::npos; b = e + 1) out.push_back(s.substr(b, e - b));
  return out;
}

}  // namespace

TEST_CASE("scenario files round trip", "[harness][config]") {
  for (const char* name : {"ecm.cfg", "ecm_identity.cfg", "spmet.cfg", "pack.cfg", "toy.cfg"}) {
    INFO(name);
    const auto a = load_config(cfg_path(name));
    const auto b = parse_config_string(serialize_config(a), a.base_dir);
    CHECK(a == b);
    CHECK(serialize_config(b) == serialize_config(a));
  }
}

TEST_CASE("scenario file values", "[harness][config]") {
  const auto c = parse_config_string(kToy);
  CHECK(c.model == "toy-linear");
  CHECK(c.t_f == 40);
  CHECK(c.bounds == std::vector<double>{100.0, 1.0});
  CHECK(c.controller.theta0 == Vec2{0.1, 0.1});
  CHECK(c.controller.mu1 == 0.5);

  const auto e = load_config(cfg_path("ecm.cfg"));
  CHECK(e.bounds == std::vector<double>{5.0, 4.04, 15.0});
  CHECK(e.gamma == std::vector<double>{1.0, 1.0, 500.0});
  CHECK(e.controller.clip == 0.05);
  CHECK(e.resolved_params() == fs::path(CONFIG_DIR) / "ecm.params");
}

TEST_CASE("scenario file errors", "[harness][config]") {
  const std::string base = kToy;
  CHECK_THROWS_AS(parse_config_string(base + "[extra]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string(base + "[analysis]\nbogus = 1\n"), ConfigError);
  std::string bad_model = base;
  bad_model.replace(bad_model.find("toy-linear"), 10, "lead-acid");
  CHECK_THROWS_AS(parse_config_string(bad_model), ConfigError);
  std::string bad_gamma = base;
  bad_gamma.replace(bad_gamma.find("gamma = 1, 1"), 12, "gamma = 1, 0");
  CHECK_THROWS_AS(parse_config_string(bad_gamma).validate(), ConfigError);
  std::string short_theta = base;
  short_theta.replace(short_theta.find("theta0 = 0.1, 0.1"), 17, "theta0 = 0.1");
  CHECK_THROWS_AS(parse_config_string(short_theta), ConfigError);

  CHECK_THROWS_AS(load_config("/nonexistent/scenario.cfg"), ConfigError);
  auto missing_params = parse_config_string(base, "/nonexistent");
  CHECK_THROWS_AS(build_scenario(missing_params), ConfigError);
}

TEST_CASE("list parsing", "[harness][config]") {
  CHECK(parse_list("1, 2.5,-3") == std::vector<double>{1.0, 2.5, -3.0});
  CHECK(parse_list("4.2") == std::vector<double>{4.2});
  CHECK_THROWS_AS(parse_list("1,,2"), ConfigError);
  CHECK_THROWS_AS(parse_list("1, x"), ConfigError);
}

TEST_CASE("parameter files", "[harness][config]") {
  const auto cfg = parse_config_string(kToy);
  CHECK_NOTHROW(build_scenario(cfg, kToyParams));
  CHECK_THROWS_AS(build_scenario(cfg, std::string(kToyParams) + "e = 3\n"), ConfigError);
  CHECK_THROWS_AS(build_scenario(cfg, std::string("stray = 1\n") + kToyParams), ConfigError);
  CHECK_THROWS_AS(build_scenario(cfg, std::string(kToyParams) + "[extra]\nk = 1\n"), ConfigError);
  CHECK_THROWS_AS(build_scenario(cfg, "[toy]\na = fast\n"), ConfigError);
  CHECK_THROWS_AS(build_scenario(cfg, "[initial]\nx = 0\n"), ConfigError);

  const auto f = parse_param_file(kToyParams);
  CHECK(f.at("toy").at("d") == "0.5");
  CHECK(toy_params_from(f).a == 0.9);
}

TEST_CASE("constraint expansion", "[harness][config]") {
  SECTION("ecm voltage limit becomes a current-scaled bound") {
    const auto sc = build_scenario(load_config(cfg_path("ecm.cfg")));
    // (4.04 - 3.6) / 0.02
    REQUIRE(sc.spec.ybar.size() == 3);
    CHECK(sc.spec.ybar[0] == 5.0);
    CHECK(sc.spec.ybar[1] == Approx(22.0).epsilon(1e-12));
    CHECK(sc.spec.ybar[2] == 15.0);
    CHECK(sc.spec.gamma[2] == 500.0);
  }
  SECTION("pack families expand per cell and per pair") {
    const auto cfg = load_config(cfg_path("pack.cfg"));
    const auto sc = build_scenario(cfg);
    const auto& pk = dynamic_cast<const PackModel&>(*sc.model);
    const std::size_t n = pk.N();
    REQUIRE(sc.spec.ybar.size() == sc.model->output_count());
    for (std::size_t c = 0; c < n; ++c) {
      const auto& cell = pk.params().cells[c];
      CHECK(sc.spec.ybar[1 + c] == Approx((cfg.bounds[1] - cell.v0) / cell.Ro).epsilon(1e-12));
      CHECK(sc.spec.gamma[1 + c] == cfg.gamma[1]);
    }
    for (std::size_t i = 1 + 2 * n; i < sc.spec.ybar.size(); ++i) {
      CHECK(sc.spec.ybar[i] == cfg.bounds[3]);
      CHECK(sc.spec.gamma[i] == cfg.gamma[3]);
    }
  }
  SECTION("wrong family count names the families") {
    const auto sc = build_scenario(load_config(cfg_path("ecm.cfg")));
    try {
      expand_spec(*sc.model, {5.0, 4.04}, {1.0, 1.0});
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("temperature") != std::string::npos);
    }
  }
  SECTION("scenario dt overrides the parameter file") {
    auto cfg = load_config(cfg_path("ecm.cfg"));
    cfg.dt = 0.5;
    CHECK(build_scenario(cfg).ecm->dt == 0.5);
  }
}

TEST_CASE("trajectory csv", "[harness][output]") {
  const auto sc = build_scenario(load_config(cfg_path("ecm.cfg")));
  const auto tr = run(sc, 60);
  const std::string text = trajectory_csv(*sc.model, tr);
  const auto ls = lines(text);
  REQUIRE(ls.size() == tr.size() + 1);
  CHECK(ls[0] == "t,u,y1,y2,y3,e_active,i_star,theta_1,theta_2,alpha,J,J_star");

  const auto t = parse_csv(text);
  CHECK(t.header == trajectory_columns(*sc.model));
  const auto col = [&](const std::string& n) {
    return static_cast<std::size_t>(std::find(t.header.begin(), t.header.end(), n) - t.header.begin());
  };
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const auto& r = tr.records[k];
    const auto& row = t.rows[k];
    REQUIRE(row[col("t")] == static_cast<double>(r.t));
    REQUIRE(*row[col("u")] == Approx(r.u).epsilon(1e-11).margin(1e-300));
    REQUIRE(*row[col("y2")] == Approx(r.y[1]).epsilon(1e-11));
    REQUIRE(*row[col("i_star")] == static_cast<double>(r.i_star + 1));
    REQUIRE(*row[col("theta_2")] == Approx(r.theta[1]).epsilon(1e-11));
    REQUIRE_FALSE(row[col("J_star")].has_value());  // not computed for this run
  }

  CHECK(format_number(0.1 + 0.2) == "0.3");
  CHECK(format_number(std::nan("")) == "");
  CHECK(std::stod(format_number(M_PI)) == Approx(M_PI).epsilon(1e-12));
}

TEST_CASE("spmet csv keeps a fixed column count", "[harness][output]") {
  const auto sc = build_scenario(load_config(cfg_path("spmet.cfg")));
  const auto tr = run(sc, 30);
  const auto ls = lines(trajectory_csv(*sc.model, tr));
  const auto commas = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  for (const auto& l : ls) REQUIRE(commas(l) == commas(ls[0]));
  CHECK(commas(ls[0]) + 1 == static_cast<long>(trajectory_columns(*sc.model).size()));
}

TEST_CASE("csv reader rejects malformed input", "[harness][output]") {
  CHECK_THROWS_AS(parse_csv(""), IoError);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), IoError);
  CHECK_THROWS_AS(parse_csv("a,b\n1,x\n"), IoError);
  const auto t = parse_csv("a,b\n1,\n");
  CHECK_FALSE(t.rows[0][1].has_value());
  CHECK_THROWS_AS(read_csv("/nonexistent/x.csv"), IoError);
}

TEST_CASE("svg plots", "[harness][output]") {
  const auto sc = build_scenario(load_config(cfg_path("ecm.cfg")));
  const auto tr = run(sc, 80);
  auto series = series_for(tr, "current", "model-free", "#1f77b4");
  const auto o = series_for(tr, "current", "oracle", "#d62728", true);
  series.insert(series.end(), o.begin(), o.end());
  const std::string a = render_svg(series, "current", "ecm");
  const std::string b = render_svg(series, "current", "ecm");
  CHECK(a == b);
  std::size_t polylines = 0;
  for (std::size_t p = 0; (p = a.find("<polyline", p)) != std::string::npos; ++p) ++polylines;
  CHECK(polylines == 2);
  CHECK(a.find(">model-free</text>") != std::string::npos);
  CHECK(a.find(">oracle</text>") != std::string::npos);
  CHECK(a.find("stroke-dasharray") != std::string::npos);

  try {
    render_svg(series, "pressure");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& q : plot_quantities()) CHECK(msg.find(q) != std::string::npos);
  }
  CHECK_THROWS_AS(render_svg({}, "current"), ConfigError);
}

TEST_CASE("sha256", "[harness][output]") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("manifest", "[harness][output]") {
  const fs::path d = scratch("manifest");
  Manifest m;
  m.command = "simulate";
  m.config_hash = sha256_hex("x");
  m.seed = 42;
  m.clamp_current = true;
  m.notes = {{"mu1", "0.5"}};
  m.files = {"trajectory.csv", "oracle.csv"};
  write_manifest(m, d / "manifest.txt");
  const auto ls = lines(read_text_file(d / "manifest.txt"));
  REQUIRE(ls.size() == 8);
  CHECK(ls[0] == "software_version = " + software_version());
  CHECK(ls[1] == "command = simulate");
  CHECK(ls[2] == "config_hash = sha256:" + sha256_hex("x"));
  CHECK(ls[3] == "seed = 42");
  CHECK(ls[4] == "clamp_current = true");
  CHECK(ls[5] == "mu1 = 0.5");
  CHECK(ls[6] == "file = trajectory.csv");
  CHECK(ls[7] == "file = oracle.csv");
  CHECK_FALSE(software_version().empty());
  fs::remove_all(d);
}
