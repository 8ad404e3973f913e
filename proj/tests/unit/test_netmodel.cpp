#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "gridbarrier/netmodel.hpp"

using namespace gridbarrier;

namespace {

RadialNetwork chain(std::vector<double> r, std::vector<double> x) {
  RadialNetwork net;
  net.n = r.size();
  net.buses.resize(net.n);
  for (std::size_t k = 0; k < net.n; ++k) net.lines.push_back({static_cast<int>(k), static_cast<int>(k + 1), r[k], x[k]});
  return net;
}

}  // namespace

TEST_CASE("single line impedance") {
  const RadialNetwork net = chain({0.1}, {0.05});
  const Impedance z = build_impedance_matrices(net);
  CHECK(z.r(0, 0) == doctest::Approx(0.1));
  CHECK(z.x(0, 0) == doctest::Approx(0.05));
  const Impedance o = common_path_oracle(net);
  CHECK(o.r(0, 0) == doctest::Approx(0.1));
  CHECK(o.x(0, 0) == doctest::Approx(0.05));
}

TEST_CASE("two-bus chain against hand-summed paths") {
  const RadialNetwork net = chain({0.1, 0.2}, {0.05, 0.1});
  const Impedance z = build_impedance_matrices(net);
  const Matrix r_expected{{0.1, 0.1}, {0.1, 0.3}};
  const Matrix x_expected{{0.05, 0.05}, {0.05, 0.15}};
  CHECK(max_abs(z.r - r_expected) <= 1e-9);
  CHECK(max_abs(z.x - x_expected) <= 1e-9);
  const Impedance o = common_path_oracle(net);
  CHECK(max_abs(z.r - o.r) <= 1e-9);
  CHECK(max_abs(z.x - o.x) <= 1e-9);
}

TEST_CASE("star feeder has zero off-diagonal sensitivity") {
  RadialNetwork net;
  net.n = 3;
  net.buses.resize(3);
  for (int k = 1; k <= 3; ++k) net.lines.push_back({0, k, 1.0, 1.0});
  const Impedance o = common_path_oracle(net);
  CHECK(max_abs(o.r - Matrix::identity(3)) == 0.0);
  const Impedance z = build_impedance_matrices(net);
  CHECK(max_abs(z.r - Matrix::identity(3)) <= 1e-12);
}

TEST_CASE("impedance matrices are symmetric positive definite") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RadialNetwork net = generate_synthetic_feeder(2 + seed % 15, seed, 1.0);
    const Impedance z = build_impedance_matrices(net);
    CHECK(is_symmetric(z.r, 1e-10));
    CHECK(is_symmetric(z.x, 1e-10));
    CHECK(is_spd(z.r));
    CHECK(is_spd(z.x));
  }
}

TEST_CASE("chains have strictly positive sensitivities") {
  FeederOptions opt;
  opt.chain_bias = 1.0;
  const RadialNetwork net = generate_synthetic_feeder(12, 4, 1.0, opt);
  const Impedance z = build_impedance_matrices(net);
  CHECK(*std::min_element(z.r.data().begin(), z.r.data().end()) > 0.0);
  CHECK(*std::min_element(z.x.data().begin(), z.x.data().end()) > 0.0);
}

TEST_CASE("doubling the slack voltage halves R and X") {
  RadialNetwork net = generate_synthetic_feeder(8, 2, 1.0);
  const Impedance a = build_impedance_matrices(net);
  net.v0_mag = 2.0;
  const Impedance b = build_impedance_matrices(net);
  CHECK(max_abs(0.5 * a.r - b.r) <= 1e-12);
  CHECK(max_abs(0.5 * a.x - b.x) <= 1e-12);
}

TEST_CASE("baseline drop") {
  RadialNetwork net = chain({0.1}, {0.05});
  net.buses[0] = {1.0, 0.0, 1.0, true};
  const Impedance z = build_impedance_matrices(net);
  CHECK(compute_baseline_drop(z.r, z.x, net)[0] == doctest::Approx(0.0));

  net.buses[0] = {1.0, 1.0, 3.0, true};  // p_av - p_e = 2, q_e = 1
  CHECK(compute_baseline_drop(z.r, z.x, net)[0] == doctest::Approx(0.1 * 2 - 0.05 * 1));

  RadialNetwork more = generate_synthetic_feeder(10, 9, 1.0);
  const SensitivityModel m0 = build_sensitivity_model(more);
  for (auto& b : more.buses) b.p_av *= 1.5;
  const SensitivityModel m1 = build_sensitivity_model(more);
  for (std::size_t i = 0; i < more.n; ++i) CHECK(m1.e[i] >= m0.e[i]);
}

TEST_CASE("sensitivity model stacks R and X") {
  const SensitivityModel m = build_sensitivity_model(generate_synthetic_feeder(5, 1, 1.0));
  REQUIRE(m.b.cols() == 10);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(m.b(i, j) == m.r(i, j));
      CHECK(m.b(i, 5 + j) == m.x(i, j));
    }
  }
}

TEST_CASE("validation errors") {
  RadialNetwork cyc = chain({0.1, 0.1}, {0.1, 0.1});
  cyc.lines[1] = {0, 1, 0.1, 0.1};  // bus 2 unreachable, bus 1 doubly attached
  CHECK_THROWS_AS(validate(cyc), NotATree);

  RadialNetwork few = chain({0.1, 0.1}, {0.1, 0.1});
  few.lines.pop_back();
  CHECK_THROWS_AS(build_impedance_matrices(few), NotATree);

  RadialNetwork neg = chain({0.1, -0.1}, {0.1, 0.1});
  CHECK_THROWS_AS(build_impedance_matrices(neg), NonPositiveImpedance);
  RadialNetwork zero_x = chain({0.1}, {0.0});
  CHECK_THROWS_AS(validate(zero_x), NonPositiveImpedance);

  RadialNetwork solar = chain({0.1}, {0.1});
  solar.buses[0].p_av = 1.0;  // no inverter there
  CHECK_THROWS_AS(validate(solar), ValidationError);
}

TEST_CASE("synthetic feeder") {
  const RadialNetwork a = generate_synthetic_feeder(30, 7, 1.0);
  const RadialNetwork b = generate_synthetic_feeder(30, 7, 1.0);
  CHECK(format_network_csv(a) == format_network_csv(b));

  const RadialNetwork big = generate_synthetic_feeder(56, 3, 1.0);
  const SensitivityModel m = build_sensitivity_model(big);
  const double peak = *std::max_element(m.e.begin(), m.e.end());
  CHECK(peak > 0.05);
  CHECK(peak == doctest::Approx(0.0642).epsilon(1e-9));

  const RadialNetwork off = generate_synthetic_feeder(20, 7, 0.0);
  for (const BusData& bus : off.buses) CHECK(bus.p_av == 0.0);
  const SensitivityModel mo = build_sensitivity_model(off);
  CHECK(*std::max_element(mo.e.begin(), mo.e.end()) < 0.05);
  CHECK(std::any_of(off.buses.begin(), off.buses.end(), [](const BusData& bus) { return bus.has_inverter; }));
}

TEST_CASE("network CSV round trip and errors") {
  const RadialNetwork net = generate_synthetic_feeder(9, 5, 1.2);
  std::istringstream in(format_network_csv(net));
  const RadialNetwork back = parse_network_csv(in);
  CHECK(format_network_csv(back) == format_network_csv(net));
  CHECK(max_abs(build_impedance_matrices(back).r - build_impedance_matrices(net).r) == 0.0);

  std::istringstream bad_header("LINES: a,b\n");
  CHECK_THROWS_AS(parse_network_csv(bad_header), ParseError);
  std::istringstream bad_number("LINES: from,to,r,x\n0,1,abc,0.1\nBUSES: id,p_e,q_e,p_av,has_inverter\n1,0,0,0,0\n");
  try {
    parse_network_csv(bad_number);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(read_network_csv("/nonexistent/feeder.csv"), MissingFile);
}
