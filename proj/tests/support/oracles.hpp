#pragma once

// Independent reference computations shared by the unit and acceptance
// tests. None of these reuse the library's solvers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "gridbarrier/baselines.hpp"
#include "gridbarrier/controller.hpp"
#include "gridbarrier/netmodel.hpp"
#include "gridbarrier/plant.hpp"

namespace oracle {

using gridbarrier::InverterLimits;
using gridbarrier::Matrix;
using gridbarrier::Vector;

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline Vector jacobi_eigenvalues(Matrix a) {
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vector ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  return ev;
}

// Largest singular value from the eigenvalues of M M^T.
inline double max_singular_value(const Matrix& m) {
  Matrix g(m.rows(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m.cols(); ++k) s += m(i, k) * m(j, k);
      g(i, j) = s;
    }
  const Vector ev = jacobi_eigenvalues(g);
  return std::sqrt(std::max(0.0, *std::max_element(ev.begin(), ev.end())));
}

inline double cost(const Vector& q, const Vector& u) {
  double c = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) c += 0.5 * q[j] * u[j] * u[j];
  return c;
}

inline bool feasible(const Matrix& b, const Vector& e, const Vector& x_bar, const Vector& u, double tol) {
  for (std::size_t i = 0; i < b.rows(); ++i) {
    double x = e[i];
    for (std::size_t j = 0; j < u.size(); ++j) x += b(i, j) * u[j];
    if (x > x_bar[i] + tol) return false;
  }
  return true;
}

// Exhaustive grid over the free coordinates (lo < hi) of the box. Returns the
// best feasible objective, +inf when no grid point is feasible. `points` per
// free coordinate includes both endpoints.
inline double grid_search(const Vector& q, const Matrix& b, const Vector& e, const Vector& x_bar,
                          const InverterLimits& lim, std::size_t points) {
  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < lim.size(); ++j)
    if (lim.lo[j] < lim.hi[j]) free.push_back(j);
  Vector u(lim.size());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = lim.lo[j];
  std::vector<std::size_t> idx(free.size(), 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t k = 0; k < free.size(); ++k) {
      const std::size_t j = free[k];
      u[j] = lim.lo[j] + (lim.hi[j] - lim.lo[j]) * static_cast<double>(idx[k]) / static_cast<double>(points - 1);
    }
    if (feasible(b, e, x_bar, u, 0.0)) best = std::min(best, cost(q, u));
    std::size_t k = 0;
    while (k < free.size() && ++idx[k] == points) idx[k++] = 0;
    if (k == free.size()) break;
  }
  return best;
}

// min over the free coordinates with a fine grid on the single free pair
// (one inverter bus). Resolution is the grid spacing.
inline double grid_search_resolution(const Vector& q, const Matrix& b, const Vector& e, const Vector& x_bar,
                                     const InverterLimits& lim, double resolution) {
  double widest = 0.0;
  for (std::size_t j = 0; j < lim.size(); ++j) widest = std::max(widest, lim.hi[j] - lim.lo[j]);
  const auto points = static_cast<std::size_t>(std::ceil(widest / resolution)) + 1;
  return grid_search(q, b, e, x_bar, lim, points);
}

// Small random instance drawn from a feeder: B = [R X] of a random tree, a
// drop e pushed above the limit at the deepest buses, and inverters on
// `inverters` buses only.
struct QpInstance {
  Matrix b;
  Vector e;
  Vector x_bar;
  Vector q;
  InverterLimits limits;
};

inline QpInstance random_qp(std::uint64_t seed, std::size_t n, std::size_t inverters, double x_bar = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  gridbarrier::FeederOptions opt;
  opt.r_min = 0.05;
  opt.r_max = 0.2;
  gridbarrier::RadialNetwork net = gridbarrier::generate_synthetic_feeder(n, seed, 1.0, opt);
  const gridbarrier::Impedance z = gridbarrier::common_path_oracle(net);
  QpInstance inst;
  inst.b = gridbarrier::hstack(z.r, z.x);
  inst.e.resize(n);
  for (std::size_t i = 0; i < n; ++i) inst.e[i] = x_bar * (0.6 + 0.8 * unit(rng));
  inst.x_bar.assign(n, x_bar);
  inst.q.resize(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    inst.q[j] = 2.0 * (1.0 + 4.0 * unit(rng));
    inst.q[n + j] = 2.0 * (0.5 + 2.0 * unit(rng));
  }
  inst.limits.lo.assign(2 * n, 0.0);
  inst.limits.hi.assign(2 * n, 0.0);
  std::vector<std::size_t> buses(n);
  for (std::size_t k = 0; k < n; ++k) buses[k] = k;
  std::shuffle(buses.begin(), buses.end(), rng);
  for (std::size_t k = 0; k < std::min(inverters, n); ++k) {
    const std::size_t bus = buses[k];
    const double p_av = 0.5 + unit(rng);
    inst.limits.lo[bus] = -p_av;
    inst.limits.lo[n + bus] = -0.4 * p_av;
    inst.limits.hi[n + bus] = 0.4 * p_av;
  }
  return inst;
}

}  // namespace oracle
