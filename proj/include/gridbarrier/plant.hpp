#pragma once

#include <cstdint>
#include <string>

#include "gridbarrier/linalg.hpp"
#include "gridbarrier/netmodel.hpp"

namespace gridbarrier {

// Imperfect knowledge of B held by a controller. eps_b is the realized
// spectral norm of B - B_hat.
struct ModelEstimate {
  Matrix b_hat;
  double eps_b = 0.0;
  double relative_error = 0.0;
};

// Box on the stacked action u = (u^p, u^q).
struct InverterLimits {
  Vector lo;
  Vector hi;

  std::size_t size() const { return lo.size(); }
  // Available solar per bus, read back from the active-power lower bound.
  Vector p_av() const;

  // u^p in [-p_av, 0], u^q in [-f p_av, f p_av] (or [-f p_av, 0] when
  // upper_zero is set).
  static InverterLimits from_network(const RadialNetwork& net, double reactive_fraction,
                                     bool upper_zero);
};

void validate(const InverterLimits& limits);

Vector project_to_box(std::span<const double> u, const InverterLimits& limits);

// The physical grid: noise-free linear response to setpoints.
class Plant {
 public:
  explicit Plant(SensitivityModel model) : model_(std::move(model)) {}

  Vector measure(std::span<const double> u) const;
  const SensitivityModel& model() const { return model_; }
  std::size_t buses() const { return model_.buses(); }

 private:
  SensitivityModel model_;
};

// x = B u + e. Throws DimensionMismatch.
Vector measure(const SensitivityModel& model, std::span<const double> u);

enum class PerturbationKind { parametric, topological, both };

PerturbationKind parse_perturbation_kind(const std::string& s);
std::string to_string(PerturbationKind kind);

// Parametric: every entry scaled by (1 + d), d ~ U[-magnitude, magnitude],
// then each n x n block re-symmetrized. Topological: a random transposition
// of two bus indices applied to rows and, inside each block, to columns.
// `transpositions` > 1 composes several. Deterministic in `seed`.
ModelEstimate perturb_model(const Matrix& b, PerturbationKind kind, double magnitude,
                            std::uint64_t seed, int transpositions = 1);

struct TunedPerturbation {
  ModelEstimate estimate;
  double magnitude = 0.0;
  int transpositions = 0;
};

// Search magnitude and transposition count so that the realized relative
// error lands on `target_relative` (within 5e-3 when reachable).
TunedPerturbation tune_perturbation(const Matrix& b, PerturbationKind kind, double target_relative,
                                    std::uint64_t seed);

// Largest singular value by power iteration on the smaller Gram matrix.
double spectral_norm(const Matrix& m);

}  // namespace gridbarrier
