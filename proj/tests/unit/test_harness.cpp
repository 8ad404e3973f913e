#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gridbarrier/experiment.hpp"
#include "gridbarrier/output.hpp"
#include "gridbarrier/scenario.hpp"

using namespace gridbarrier;
namespace fs = std::filesystem;

namespace {

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

const char* kSmall =
    "[scenario]\nname = small\n"
    "[network]\nsynthetic_n = 6\nsynthetic_seed = 2\n"
    "[estimate E]\nkind = both\nmagnitude = 0.2\nseed = 9\n"
    "[controller]\nmax_iterations = 400\n";

#ifdef GRIDBARRIER_CLI
int run_cli(const std::string& args) {
  const std::string cmd = std::string(GRIDBARRIER_CLI) + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}
#endif

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gridbarrier_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("scenario defaults") {
  const Scenario s = parse("[network]\nsynthetic_n = 4\n");
  CHECK(s.controller.beta == 200.0);
  CHECK(s.controller.kappa == 0.6);
  CHECK(s.controller.c_p == 3.0);
  CHECK(s.controller.c_q == 1.0);
  CHECK(s.x_bar_pu() == doctest::Approx(0.05));
  CHECK(s.network.nominal_kv == 12.0);
  CHECK(s.limits.reactive_fraction == 0.4);
}

TEST_CASE("scenario errors") {
  CHECK_THROWS_AS(parse("[network]\nsynthetic_n = 4\n[controller]\nx_bar_percent = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse("[controller]\nbeta = 200\n"), ValidationError);  // no network
  try {
    parse("[network]\nsynthetic_n = 4\n[controller]\nbetta = 3\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("betta") != std::string::npos);
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("[network]\nsynthetic_n = 4\n[network]\nsynthetic_n = 5\n"), ParseError);
  CHECK_THROWS_AS(parse("[weather]\n"), ParseError);
  CHECK_THROWS_AS(parse("[network]\nsynthetic_n = four\n"), ParseError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.cfg"), MissingFile);
}

TEST_CASE("scenario round trip") {
  Scenario s = parse(kSmall);
  s.controller.eta = 0.0125;
  s.controller.step_scale = 1.3;
  s.estimates.front().target_relative_error = 0.3;
  s.baselines.pd_max_iterations = 77;
  CHECK(parse(format_scenario(s)) == s);
}

TEST_CASE("seed override") {
  Scenario s = parse(kSmall);
  override_seeds(s, 40);
  CHECK(s.network.synthetic_seed == 40);
  CHECK(s.estimates.front().seed == 41);

  const fs::path dir = scratch("seed");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "s.cfg") << kSmall;
  }
  ::setenv("GRIDBARRIER_SEED", "40", 1);
  const Scenario env = load_scenario((dir / "s.cfg").string());
  ::unsetenv("GRIDBARRIER_SEED");
  CHECK(env.network.synthetic_seed == 40);
  CHECK(load_scenario((dir / "s.cfg").string()).network.synthetic_seed == 2);
  fs::remove_all(dir);
}

TEST_CASE("trajectory CSV") {
  Trajectory t;
  t.steps.push_back(make_record(0, Vector{-0.1, 0.0}, Vector{0.07}, Vector{0.05}, 0, 0.25, kEventInit));
  const std::string csv = format_trajectory_csv(t);
  std::istringstream in(csv);
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == kTrajectoryCsvHeader);
  CHECK(row.rfind("0,0.07,1,0.25,", 0) == 0);
  CHECK(row.substr(row.size() - 2) == ",1");
  CHECK_FALSE(std::getline(in, extra));

  CHECK_THROWS_AS(write_trajectory_csv(Trajectory{}, "/tmp/unused.csv"), ValidationError);
}

TEST_CASE("runs re-emit identical bytes") {
  const Scenario s = parse(kSmall);
  const ExperimentResult a = run_experiment(s);
  const ExperimentResult b = run_experiment(s);
  REQUIRE(a.methods.size() == b.methods.size());
  for (std::size_t k = 0; k < a.methods.size(); ++k) {
    CHECK(format_trajectory_csv(a.methods[k].trajectory) == format_trajectory_csv(b.methods[k].trajectory));
  }
  CHECK(format_summary_csv(a) == format_summary_csv(b));
  CHECK(a.find("barrier-E") != nullptr);
  CHECK(a.find("primal_dual-E") != nullptr);
  CHECK(a.find("lcqp_true") != nullptr);
}

TEST_CASE("comparison plot") {
  const std::vector<PlotSeries> series{{"barrier", {0.064, 0.055, 0.05}}, {"primal-dual", {0.064, 0.07, 0.06, 0.05}}};
  const std::string svg = render_svg(series, 0.05, 12.0, "peak voltage");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++polylines;
  CHECK(polylines == 2);
  CHECK(svg.find("stroke-dasharray=\"6,4\"") != std::string::npos);
  CHECK(svg.find(">barrier<") != std::string::npos);
  CHECK(svg.find(">primal-dual<") != std::string::npos);
  CHECK(svg.find("12.6") != std::string::npos);  // limit 12 kV * 1.05

  const std::vector<PlotSeries> flat{{"lcqp", {0.05}}};
  CHECK(render_svg(flat, 0.05, 12.0, "t").find("<polyline") != std::string::npos);
}

TEST_CASE("not activated scenario") {
  Scenario s = parse(kSmall);
  s.network.overload_factor = 0.0;
  const ExperimentResult r = run_experiment(s);
  const MethodResult* m = r.find("barrier-E");
  REQUIRE(m != nullptr);
  CHECK(m->status == "not-activated");
  CHECK(m->trajectory.steps.size() == 1);
  CHECK(m->violations == 0);
}

TEST_CASE("written experiment") {
  const ExperimentResult r = run_experiment(parse(kSmall));
  const fs::path dir = scratch("out");
  const std::vector<std::string> paths = write_experiment(r, dir.string());
  for (const std::string& p : paths) CHECK(fs::exists(p));
  CHECK(fs::exists(dir / "comparison.svg"));
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "barrier-E.csv"));
  fs::remove_all(dir);
}

TEST_CASE("bundled scenario") {
  const Scenario s = load_scenario(GRIDBARRIER_DATA_DIR "/feeder56.cfg");
  CHECK(s.network.file.has_value());
  CHECK(s.estimates.size() == 2);
  CHECK(s.controller.beta == 200.0);
  CHECK(s.controller.kappa == 0.6);
}

#ifdef GRIDBARRIER_CLI
TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("run --scenario /nonexistent.cfg --out " + dir.string()) == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("gen-feeder --n 5 --out " + (dir / "f.csv").string()) == 2);  // directory missing
  fs::create_directories(dir);
  CHECK(run_cli("gen-feeder --n 5 --out " + (dir / "f.csv").string()) == 0);
  CHECK(fs::exists(dir / "f.csv"));
  {
    std::ofstream(dir / "bad.cfg") << "[network]\nsynthetic_n = 4\n[controller]\nx_bar_percent = 0\n";
  }
  CHECK(run_cli("compare --scenario " + (dir / "bad.cfg").string()) == 1);
  {
    std::ofstream(dir / "ok.cfg") << kSmall;
  }
  CHECK(run_cli("sweep --scenario " + (dir / "ok.cfg").string() + " --magnitudes 0,0.2 --out " +
                (dir / "sweep.csv").string()) == 0);
  CHECK(fs::exists(dir / "sweep.csv"));
  fs::remove_all(dir);
}
#endif
