#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mhdlag/cli.hpp"
#include "mhdlag/snapshot.hpp"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace mhdlag;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mhdlag_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig small(const std::string& scenario, const fs::path& out) {
  RunConfig c = parse_config("scenario = " + scenario +
                             "\nnx = 8\nny = 8\nnz = 9\nT = 0.02\ndt = 2e-3\ncadence = 5\nout = " + out.string() + "\n");
  return c;
}

nlohmann::json summary(const fs::path& out) { return nlohmann::json::parse(slurp(out / "summary.json")); }

}  // namespace

TEST_CASE("config: comments, blanks and defaults") {
  const RunConfig c = parse_config("# header\n\n  nx = 12   # trailing\nT=0.2\nscenario = zero\nbottom = no_slip\n");
  CHECK(c.grid.nx == 12);
  CHECK(c.grid.ny == 16);
  CHECK(c.iteration.T == 0.2);
  CHECK(c.scenario == "zero");
  CHECK(c.iteration.bottom == BottomCondition::no_slip);
}

TEST_CASE("config: errors name the line and the key") {
  CHECK_THROWS_WITH_AS(parse_config("nx = 8\nfoo = 1\n", "a.cfg"), doctest::Contains("a.cfg:2: unknown key 'foo'"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("nu = fast\n", "a.cfg"), doctest::Contains("a.cfg:1: key 'nu'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("nx = 8.5\n"), doctest::Contains("key 'nx'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("nx = 8\nnx = 9\n"), doctest::Contains("repeats line 1"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("just words\n"), doctest::Contains(":1: expected 'key = value'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("scenario = big\n"), doctest::Contains("unknown scenario"), ConfigError);
  // Semantic checks point at the line of the offending key.
  CHECK_THROWS_WITH_AS(parse_config("T = 0.1\n\ndt = 0.03\n", "b.cfg"), doctest::Contains("b.cfg:3: key 'dt'"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("delta = 0.2\n"), doctest::Contains("key 'delta'"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.cfg"), UsageError);
}

TEST_CASE("config: canonical form is a fixed point") {
  const RunConfig c = parse_config("dt = 0.002\nT = 0.02\nnu = 0.3\nout = somewhere\nseed = 18446744073709551615\n");
  const std::string text = c.canonical();
  CHECK(parse_config(text).canonical() == text);
  CHECK(text.find("nu = 0.3\n") != std::string::npos);
  CHECK(text.find("seed = 18446744073709551615\n") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == long(config_keys().size()));
}

TEST_CASE("shipped presets parse") {
  for (const char* name : {"zero", "ns-reduction", "small-mode", "polluted-divergence", "continuation"}) {
    const RunConfig c = load_config(std::string(MHDLAG_SOURCE_DIR) + "/presets/" + name + ".cfg");
    CHECK(c.scenario == name);
  }
}

TEST_CASE("preset generators") {
  const fs::path out = scratch("gen");
  RunConfig c = small("small-mode", out);
  c.amplitude = 0.01;
  InitialData d = make_initial_data(c);
  const CompatReport ok = check_compatibility(d.u0, d.H0, reference_normal(d.u0.grid()), 1e-10);
  CHECK(ok.ok());
  CHECK(max_abs(d.H0[0]) > 0.0);

  c.scenario = "polluted-divergence";
  c.pollution = 0.5;
  d = make_initial_data(c);
  // d/dx (A p sin x sin(pi z)) peaks at A p, reached at x = 0, z = -1/2.
  const CompatReport bad = check_compatibility(d.u0, d.H0, reference_normal(d.u0.grid()), 1e-10);
  CHECK(bad.failures() == "div_H0");
  CHECK(bad.residual("div_H0") == doctest::Approx(0.005).epsilon(1e-12));

  c.scenario = "ns-reduction";
  c.surface_amplitude = 0.01;
  d = make_initial_data(c);
  CHECK(max_abs(d.H0[0]) == 0.0);
  CHECK(d.h0.values().abs().maxCoeff() == doctest::Approx(0.01));
}

TEST_CASE("push-forward: identity, translation and mass") {
  Grid g;
  g.nx = g.ny = 12;
  g.nz = 13;
  const ScalarField f =
      ScalarField::sample(g, [](double x, double y, double z) { return std::sin(x) * std::cos(2 * y) + z * z; });

  const PushForward same = push_forward(f, VectorField(g));
  CHECK(same.empty_nodes == 0);
  CHECK(max_abs(same.field - f) < 1e-12);

  VectorField shift(g);
  shift[0].values().setConstant(g.hx());
  const PushForward moved = push_forward(f, shift);
  double worst = 0.0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.nz; ++k) worst = std::max(worst, std::abs(moved.field((i + 1) % g.nx, j, k) - f(i, j, k)));
  CHECK(worst < 1e-12);

  // Small divergence-free swirl: the quadrature of the pushed field stays put.
  VectorField swirl(g);
  swirl[0] = ScalarField::sample(g, [&](double, double y, double) { return 0.05 * g.hx() * std::sin(y); });
  swirl[1] = ScalarField::sample(g, [&](double x, double, double) { return 0.05 * g.hy() * std::cos(x); });
  const ScalarField c = ScalarField::sample(g, [](double x, double, double z) { return 2 + std::cos(x) * (1 + z); });
  auto mass = [&](const ScalarField& s) {
    double m = 0.0;
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j)
        for (int k = 0; k < g.nz; ++k) m += s(i, j, k) * g.cell_weight(k);
    return m;
  };
  const PushForward p = push_forward(c, swirl);
  CHECK(p.empty_nodes == 0);
  CHECK(std::abs(mass(p.field) / mass(c) - 1) < 0.01);
}

TEST_CASE("check: exit codes") {
  const fs::path out = scratch("check");
  CHECK(cmd_check(small("small-mode", out)) == exit_ok);
  CHECK(cmd_check(small("polluted-divergence", out)) == exit_diagnostic);
  RunConfig c = small("small-mode", out);
  c.initial_data = (out / "missing").string();
  CHECK_THROWS_AS(cmd_check(c), UsageError);
}

TEST_CASE("run: zero scenario") {
  const fs::path out = scratch("zero");
  const RunConfig c = small("zero", out);
  REQUIRE(cmd_run(c) == exit_ok);
  const auto s = summary(out);
  CHECK(s["status"] == "converged");
  CHECK(s["config"] == c.canonical());
  CHECK(slurp(out / "config.cfg") == c.canonical());
  CHECK(s["iterates"].size() == 1);
  for (const auto& [name, value] : s["norms"]["values"].items()) CHECK(value.get<double>() == 0.0);
  CHECK(s["snapshots"] == nlohmann::json::array({0, 5, 10}));
  CHECK(fs::exists(out / "snapshots" / "level_00010" / "B_z.mhdf"));
  CHECK(s.dump().find("seconds") == std::string::npos);

  std::istringstream csv(slurp(out / "levels.csv"));
  std::string header, line;
  std::getline(csv, header);
  CHECK(header == "level,t,v_l2,B_l2,h_max,div_inf,div_l2,flat_div_inf,energy,jac_min,jac_max");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 11);

  REQUIRE(cmd_pushfwd(c) == exit_ok);
  const ScalarField e = read_snapshot((out / "eulerian" / "level_00010" / "v_x.mhdf").string());
  CHECK(max_abs(e) == 0.0);
}

TEST_CASE("run: small data contracts and round-trips through check") {
  const fs::path out = scratch("small");
  RunConfig c = small("small-mode", out);
  c.amplitude = 0.005;
  c.surface_amplitude = 0.005;
  REQUIRE(cmd_run(c) == exit_ok);
  const auto s = summary(out);
  CHECK(s["chi"].get<double>() < 1.0);
  CHECK(s["smallness"]["ok"] == true);
  CHECK(s["failed_diagnostics"].empty());

  RunConfig back = c;
  back.initial_data = (out / "snapshots" / "level_00010").string();
  std::ostringstream captured;
  auto* old = std::cout.rdbuf(captured.rdbuf());
  cmd_check(back);
  std::cout.rdbuf(old);
  const auto report = nlohmann::json::parse(captured.str());
  for (const char* k : {"v", "B", "h"}) {
    const double logged = s["final_state_norms"][k], reread = report["data_norms"][k];
    CHECK(logged > 0.0);
    CHECK(std::abs(logged - reread) <= 1e-12 * logged);
  }

  REQUIRE(cmd_pushfwd(c) == exit_ok);
  CHECK(fs::exists(out / "eulerian" / "level_00005" / "q.mhdf"));
}

TEST_CASE("run: oversized data exits with non-contraction") {
  const fs::path out = scratch("big");
  RunConfig c = small("small-mode", out);
  c.amplitude = 100.0;
  CHECK(cmd_run(c, 1) == exit_noncontraction);
  const auto s = summary(out);
  CHECK(s["status"] == "non_contraction");
  CHECK(s["attempts"].size() == 2);
  CHECK(s["attempts"][1]["T"] == 0.01);
  CHECK(s["suggestion"] == "retry with T = 0.005");
  CHECK_THROWS_AS(cmd_run(c, 4), UsageError);
}

TEST_CASE("probe: empty, reproducible, complete schema") {
  const fs::path out = scratch("probe");
  RunConfig c = small("zero", out);
  c.probe_n = 6;
  c.probe_trials = 0;
  CHECK(cmd_probe(c) == exit_ok);
  auto j = nlohmann::json::parse(slurp(out / "probe.json"));
  CHECK(j["trials"] == 0);
  for (const auto& s : j["slopes"]) CHECK(s["slopes"].empty());

  c.probe_trials = 1;
  CHECK(cmd_probe(c) == exit_ok);
  const std::string first = slurp(out / "probe.json"), first_csv = slurp(out / "probe.csv");
  c.workers = 2;
  CHECK(cmd_probe(c) == exit_ok);
  CHECK(slurp(out / "probe.json") == first);
  CHECK(slurp(out / "probe.csv") == first_csv);
  j = nlohmann::json::parse(first);
  CHECK(j["slopes"].size() == 3);
  for (const auto& s : j["slopes"])
    for (const char* k : {"name", "T", "ratios", "slopes", "slope", "expected", "two_sided", "ok"}) CHECK(s.contains(k));
  for (const auto& s : j["constants"])
    for (const char* k : {"name", "coarse", "fine", "constant_coarse", "constant_fine", "spread", "ok"})
      CHECK(s.contains(k));
}
