#include "gridbarrier/plant.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gridbarrier {

Vector InverterLimits::p_av() const {
  const std::size_t n = lo.size() / 2;
  Vector p(n);
  for (std::size_t k = 0; k < n; ++k) p[k] = -lo[k];
  return p;
}

InverterLimits InverterLimits::from_network(const RadialNetwork& net, double reactive_fraction,
                                            bool upper_zero) {
  if (!(reactive_fraction >= 0.0)) throw ValidationError("reactive fraction must be >= 0");
  const std::size_t n = net.n;
  InverterLimits lim{Vector(2 * n, 0.0), Vector(2 * n, 0.0)};
  for (std::size_t k = 0; k < n; ++k) {
    const BusData& b = net.buses[k];
    if (!b.has_inverter) continue;
    lim.lo[k] = -b.p_av;
    lim.lo[n + k] = -reactive_fraction * b.p_av;
    lim.hi[n + k] = upper_zero ? 0.0 : reactive_fraction * b.p_av;
  }
  return lim;
}

void validate(const InverterLimits& limits) {
  if (limits.lo.size() != limits.hi.size() || limits.lo.size() % 2 != 0) {
    throw DimensionMismatch("limit vectors must have equal, even length");
  }
  for (std::size_t j = 0; j < limits.lo.size(); ++j) {
    if (!(limits.lo[j] <= limits.hi[j])) {
      throw ValidationError("lower limit exceeds upper limit at action " + std::to_string(j));
    }
  }
}

Vector project_to_box(std::span<const double> u, const InverterLimits& limits) {
  if (u.size() != limits.size()) throw DimensionMismatch("action length does not match limits");
  Vector out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = std::clamp(u[j], limits.lo[j], limits.hi[j]);
  return out;
}

Vector measure(const SensitivityModel& model, std::span<const double> u) {
  if (u.size() != model.b.cols()) {
    throw DimensionMismatch("action has length " + std::to_string(u.size()) + ", model expects " +
                            std::to_string(model.b.cols()));
  }
  return axpy(1.0, model.b * u, model.e);
}

Vector Plant::measure(std::span<const double> u) const { return gridbarrier::measure(model_, u); }

PerturbationKind parse_perturbation_kind(const std::string& s) {
  if (s == "parametric") return PerturbationKind::parametric;
  if (s == "topological") return PerturbationKind::topological;
  if (s == "both") return PerturbationKind::both;
  throw ValidationError("unknown perturbation kind '" + s + "' (parametric|topological|both)");
}

std::string to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::parametric:
      return "parametric";
    case PerturbationKind::topological:
      return "topological";
    case PerturbationKind::both:
      return "both";
  }
  return "?";
}

ModelEstimate perturb_model(const Matrix& b, PerturbationKind kind, double magnitude,
                            std::uint64_t seed, int transpositions) {
  if (!(magnitude >= 0.0)) throw ValidationError("perturbation magnitude must be >= 0");
  const std::size_t n = b.rows();
  if (b.cols() != 2 * n) throw DimensionMismatch("B must be n x 2n");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Matrix bh = b;

  // Draws are taken unconditionally so that the transposition sequence does
  // not depend on the magnitude or kind.
  Matrix delta(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < 2 * n; ++j) delta(i, j) = unit(rng);

  if (kind != PerturbationKind::topological && magnitude > 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < 2 * n; ++j) bh(i, j) *= 1.0 + magnitude * delta(i, j);
    for (std::size_t blk = 0; blk < 2; ++blk) {
      const std::size_t off = blk * n;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double avg = 0.5 * (bh(i, off + j) + bh(j, off + i));
          bh(i, off + j) = avg;
          bh(j, off + i) = avg;
        }
      }
    }
  }

  if (kind != PerturbationKind::parametric && n >= 2) {
    for (int t = 0; t < transpositions; ++t) {
      std::uniform_int_distribution<std::size_t> first(0, n - 1);
      std::uniform_int_distribution<std::size_t> second(0, n - 2);
      const std::size_t p = first(rng);
      std::size_t q = second(rng);
      if (q >= p) ++q;
      for (std::size_t c = 0; c < 2 * n; ++c) std::swap(bh(p, c), bh(q, c));
      for (std::size_t r = 0; r < n; ++r) {
        std::swap(bh(r, p), bh(r, q));
        std::swap(bh(r, n + p), bh(r, n + q));
      }
    }
  }

  ModelEstimate est;
  est.eps_b = spectral_norm(b - bh);
  const double bnorm = spectral_norm(b);
  est.relative_error = bnorm > 0.0 ? est.eps_b / bnorm : 0.0;
  est.b_hat = std::move(bh);
  return est;
}

TunedPerturbation tune_perturbation(const Matrix& b, PerturbationKind kind, double target_relative,
                                    std::uint64_t seed) {
  if (!(target_relative >= 0.0)) throw ValidationError("target relative error must be >= 0");
  constexpr double kMaxMagnitude = 0.95;
  constexpr int kMaxTranspositions = 40;
  constexpr double kTol = 5e-3;

  auto eval = [&](double m, int t) {
    return TunedPerturbation{perturb_model(b, kind, m, seed, t), m, t};
  };
  auto closer = [&](const TunedPerturbation& a, const TunedPerturbation& c) {
    return std::abs(a.estimate.relative_error - target_relative) <
           std::abs(c.estimate.relative_error - target_relative);
  };
  auto bisect = [&](int t) {
    double lo = 0.0;
    double hi = kMaxMagnitude;
    TunedPerturbation best = eval(hi, t);
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      TunedPerturbation cur = eval(mid, t);
      if (closer(cur, best)) best = cur;
      if (std::abs(cur.estimate.relative_error - target_relative) < 1e-4) break;
      (cur.estimate.relative_error < target_relative ? lo : hi) = mid;
    }
    return best;
  };

  if (kind == PerturbationKind::parametric) return bisect(0);

  TunedPerturbation best = eval(0.0, 0);
  auto done = [&] { return std::abs(best.estimate.relative_error - target_relative) < kTol; };
  for (int t = 1; t <= kMaxTranspositions && !done(); ++t) {
    TunedPerturbation topo = eval(0.0, t);
    if (closer(topo, best)) best = topo;
    if (kind == PerturbationKind::topological || done()) continue;
    if (topo.estimate.relative_error < target_relative &&
        eval(kMaxMagnitude, t).estimate.relative_error >= target_relative) {
      TunedPerturbation cand = bisect(t);
      if (closer(cand, best)) best = cand;
    }
  }
  if (kind == PerturbationKind::both && !done()) {
    TunedPerturbation cand = bisect(0);
    if (closer(cand, best)) best = cand;
  }
  return best;
}

double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  const Matrix gram = m.rows() <= m.cols() ? m * m.transpose() : m.transpose() * m;
  const std::size_t k = gram.rows();

  // Fixed, non-symmetric start keeps the result deterministic and avoids
  // starting orthogonal to the dominant direction in structured inputs.
  Vector v(k);
  for (std::size_t i = 0; i < k; ++i) v[i] = 1.0 + 0.1 * std::sin(1.0 + 7.0 * static_cast<double>(i));
  double lambda = 0.0;
  for (int it = 0; it < 20000; ++it) {
    Vector w = gram * v;
    const double nw = norm2(w);
    if (nw == 0.0) return 0.0;
    const double next = dot(v, w) / dot(v, v);
    for (std::size_t i = 0; i < k; ++i) v[i] = w[i] / nw;
    if (it > 2 && std::abs(next - lambda) <= 1e-14 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

}  // namespace gridbarrier
