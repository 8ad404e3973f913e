#include <cmath>

#include "doctest.h"
#include "gridbarrier/plant.hpp"
#include "oracles.hpp"

using namespace gridbarrier;

namespace {

SensitivityModel single_bus() {
  SensitivityModel m;
  m.r = Matrix{{0.1}};
  m.x = Matrix{{0.05}};
  m.b = hstack(m.r, m.x);
  m.e = {0.15};
  return m;
}

}  // namespace

TEST_CASE("measure") {
  const SensitivityModel m = single_bus();
  CHECK(measure(m, Vector{0.0, 0.0})[0] == doctest::Approx(0.15));
  CHECK(measure(m, Vector{-1.0, 0.0})[0] == doctest::Approx(0.05));
  CHECK_THROWS_AS(measure(m, Vector{1.0}), DimensionMismatch);

  // affine in u: x(a u + (1-a) v) = a x(u) + (1-a) x(v)
  const SensitivityModel big = build_sensitivity_model(generate_synthetic_feeder(15, 4, 1.0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vector u(30), v(30), w(30);
  for (int j = 0; j < 30; ++j) {
    u[j] = d(rng);
    v[j] = d(rng);
    w[j] = 0.3 * u[j] + 0.7 * v[j];
  }
  const Vector xu = measure(big, u), xv = measure(big, v), xw = measure(big, w);
  for (int i = 0; i < 15; ++i) CHECK(xw[i] == doctest::Approx(0.3 * xu[i] + 0.7 * xv[i]).epsilon(1e-12));
  Plant plant(big);
  CHECK(plant.measure(u) == xu);
}

TEST_CASE("spectral norm") {
  CHECK(spectral_norm(Matrix::identity(3)) == doctest::Approx(1.0));
  CHECK(spectral_norm(Matrix{{3, 0}, {0, 1}}) == doctest::Approx(3.0));
  CHECK(spectral_norm(Matrix{{0, 2}, {0, 0}}) == doctest::Approx(2.0));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix b = build_sensitivity_model(generate_synthetic_feeder(4 + seed, seed, 1.0)).b;
    const ModelEstimate est = perturb_model(b, PerturbationKind::both, 0.3, seed);
    CHECK(std::abs(spectral_norm(b - est.b_hat) - oracle::max_singular_value(b - est.b_hat)) <= 1e-9);
  }
}

TEST_CASE("perturbation") {
  const Matrix b = build_sensitivity_model(generate_synthetic_feeder(12, 2, 1.0)).b;
  const ModelEstimate same = perturb_model(b, PerturbationKind::parametric, 0.0, 5);
  CHECK(same.b_hat == b);
  CHECK(same.eps_b == 0.0);
  CHECK(same.relative_error == 0.0);

  const ModelEstimate a = perturb_model(b, PerturbationKind::both, 0.2, 11);
  const ModelEstimate again = perturb_model(b, PerturbationKind::both, 0.2, 11);
  CHECK(a.b_hat == again.b_hat);
  CHECK(a.eps_b == doctest::Approx(oracle::max_singular_value(b - a.b_hat)).epsilon(1e-9));
  CHECK(a.relative_error == doctest::Approx(a.eps_b / oracle::max_singular_value(b)).epsilon(1e-9));

  // blocks of B_hat stay symmetric
  const std::size_t n = 12;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(a.b_hat(i, j) == a.b_hat(j, i));
      CHECK(a.b_hat(i, n + j) == a.b_hat(j, n + i));
    }

  const Matrix small{{1, 2, 3, 4}, {5, 6, 7, 8}};
  const ModelEstimate topo = perturb_model(small, PerturbationKind::topological, 0.0, 1);
  CHECK(spectral_norm(small - topo.b_hat) > 0.0);
  // the only transposition of two buses swaps rows and the columns inside each block
  CHECK(topo.b_hat == Matrix{{6, 5, 8, 7}, {2, 1, 4, 3}});

  CHECK_THROWS_AS(perturb_model(b, PerturbationKind::parametric, -0.1, 1), ValidationError);
  CHECK(parse_perturbation_kind("both") == PerturbationKind::both);
  CHECK_THROWS_AS(parse_perturbation_kind("sideways"), ValidationError);
}

TEST_CASE("tuned perturbation reaches the two error regimes") {
  const Matrix b = build_sensitivity_model(read_network_csv(GRIDBARRIER_DATA_DIR "/feeder56.csv")).b;
  for (double target : {0.441, 0.528}) {
    const TunedPerturbation t = tune_perturbation(b, PerturbationKind::both, target, 103);
    CHECK(std::abs(t.estimate.relative_error - target) <= 0.01);
    CHECK(t.estimate.eps_b == doctest::Approx(oracle::max_singular_value(b - t.estimate.b_hat)).epsilon(1e-9));
  }
}

TEST_CASE("inverter limits") {
  RadialNetwork net = generate_synthetic_feeder(6, 1, 1.0);
  const InverterLimits lim = InverterLimits::from_network(net, 0.4, false);
  const Vector p_av = net.p_av();
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(lim.lo[k] == -p_av[k]);
    CHECK(lim.hi[k] == 0.0);
    CHECK(lim.lo[6 + k] == doctest::Approx(-0.4 * p_av[k]));
    CHECK(lim.hi[6 + k] == doctest::Approx(0.4 * p_av[k]));
  }
  CHECK(lim.p_av() == p_av);
  const InverterLimits down = InverterLimits::from_network(net, 0.4, true);
  for (std::size_t k = 0; k < 6; ++k) CHECK(down.hi[6 + k] == 0.0);

  const Vector clamped = project_to_box(Vector(12, -100.0), lim);
  for (std::size_t j = 0; j < 12; ++j) CHECK(clamped[j] == lim.lo[j]);
}
