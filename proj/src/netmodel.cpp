#include "gridbarrier/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <string>

namespace gridbarrier {

Vector RadialNetwork::p_av() const {
  Vector v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = buses[k].p_av;
  return v;
}

Vector RadialNetwork::p_e() const {
  Vector v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = buses[k].p_e;
  return v;
}

Vector RadialNetwork::q_e() const {
  Vector v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = buses[k].q_e;
  return v;
}

std::vector<bool> RadialNetwork::inverter_mask() const {
  std::vector<bool> m(n);
  for (std::size_t k = 0; k < n; ++k) m[k] = buses[k].has_inverter;
  return m;
}

TreeIndex index_tree(const RadialNetwork& net) {
  const std::size_t nodes = net.n + 1;
  if (net.lines.size() != net.n) {
    throw NotATree("expected " + std::to_string(net.n) + " lines for " +
                   std::to_string(net.n) + " non-slack buses, got " +
                   std::to_string(net.lines.size()));
  }
  std::vector<std::vector<int>> incident(nodes);
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const Line& ln = net.lines[l];
    if (ln.from < 0 || ln.to < 0 || static_cast<std::size_t>(ln.from) >= nodes ||
        static_cast<std::size_t>(ln.to) >= nodes || ln.from == ln.to) {
      throw NotATree("line " + std::to_string(l) + " has invalid endpoints " +
                     std::to_string(ln.from) + "-" + std::to_string(ln.to));
    }
    incident[ln.from].push_back(static_cast<int>(l));
    incident[ln.to].push_back(static_cast<int>(l));
  }

  TreeIndex t;
  t.parent.assign(nodes, -2);
  t.parent_line.assign(nodes, -1);
  t.depth.assign(nodes, 0);
  t.parent[0] = -1;
  std::queue<int> frontier;
  frontier.push(0);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int l : incident[u]) {
      if (l == t.parent_line[u]) continue;
      const Line& ln = net.lines[l];
      const int v = ln.from == u ? ln.to : ln.from;
      if (t.parent[v] != -2) throw NotATree("line set contains a cycle through bus " + std::to_string(v));
      t.parent[v] = u;
      t.parent_line[v] = l;
      t.depth[v] = t.depth[u] + 1;
      frontier.push(v);
    }
  }
  for (std::size_t k = 1; k < nodes; ++k) {
    if (t.parent[k] == -2) throw NotATree("bus " + std::to_string(k) + " is not reachable from bus 0");
  }
  return t;
}

void validate(const RadialNetwork& net) {
  if (net.n == 0) throw ValidationError("network has no non-slack buses");
  if (net.buses.size() != net.n) {
    throw ValidationError("bus table has " + std::to_string(net.buses.size()) +
                          " rows, expected " + std::to_string(net.n));
  }
  if (!(net.v0_mag > 0.0) || !std::isfinite(net.v0_mag)) {
    throw ValidationError("slack voltage magnitude must be positive");
  }
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const Line& ln = net.lines[l];
    if (!(ln.r > 0.0) || !(ln.x > 0.0) || !std::isfinite(ln.r) || !std::isfinite(ln.x)) {
      throw NonPositiveImpedance("line " + std::to_string(ln.from) + "-" + std::to_string(ln.to) +
                                 " needs r > 0 and x > 0");
    }
  }
  index_tree(net);
  for (std::size_t k = 0; k < net.n; ++k) {
    const BusData& b = net.buses[k];
    if (!std::isfinite(b.p_e) || !std::isfinite(b.q_e) || !std::isfinite(b.p_av)) {
      throw ValidationError("bus " + std::to_string(k + 1) + " has non-finite data");
    }
    if (b.p_av < 0.0) throw ValidationError("bus " + std::to_string(k + 1) + " has p_av < 0");
    if (!b.has_inverter && b.p_av != 0.0) {
      throw ValidationError("bus " + std::to_string(k + 1) + " has p_av > 0 but no inverter");
    }
  }
}

Impedance build_impedance_matrices(const RadialNetwork& net) {
  validate(net);
  const std::size_t n = net.n;

  // Reduced admittance Y = G + jS; the slack row and column are dropped.
  Matrix g(n, n);
  Matrix s(n, n);
  for (const Line& ln : net.lines) {
    const double mag2 = ln.r * ln.r + ln.x * ln.x;
    const double gl = ln.r / mag2;
    const double sl = -ln.x / mag2;
    const int a = ln.from - 1;
    const int b = ln.to - 1;
    if (a >= 0) {
      g(a, a) += gl;
      s(a, a) += sl;
    }
    if (b >= 0) {
      g(b, b) += gl;
      s(b, b) += sl;
    }
    if (a >= 0 && b >= 0) {
      g(a, b) -= gl;
      g(b, a) -= gl;
      s(a, b) -= sl;
      s(b, a) -= sl;
    }
  }

  // (G + jS)(R + jX) = I  <=>  [G -S; S G] [R; X] = [I; 0]
  Matrix block(2 * n, 2 * n);
  Matrix rhs(2 * n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      block(i, j) = g(i, j);
      block(i, n + j) = -s(i, j);
      block(n + i, j) = s(i, j);
      block(n + i, n + j) = g(i, j);
    }
    rhs(i, i) = 1.0;
  }
  const Matrix z = solve_linear(block, rhs);

  Impedance out{Matrix(n, n), Matrix(n, n)};
  const double scale = 1.0 / net.v0_mag;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.r(i, j) = scale * z(i, j);
      out.x(i, j) = scale * z(n + i, j);
    }
  }
  return out;
}

Impedance common_path_oracle(const RadialNetwork& net) {
  const TreeIndex t = index_tree(net);
  const std::size_t n = net.n;
  Impedance out{Matrix(n, n), Matrix(n, n)};
  std::vector<char> on_path(net.lines.size());
  for (std::size_t j = 1; j <= n; ++j) {
    std::fill(on_path.begin(), on_path.end(), 0);
    for (int v = static_cast<int>(j); v != 0; v = t.parent[v]) on_path[t.parent_line[v]] = 1;
    for (std::size_t k = 1; k <= n; ++k) {
      double rs = 0.0;
      double xs = 0.0;
      for (int v = static_cast<int>(k); v != 0; v = t.parent[v]) {
        const int l = t.parent_line[v];
        if (on_path[l]) {
          rs += net.lines[l].r;
          xs += net.lines[l].x;
        }
      }
      out.r(j - 1, k - 1) = rs / net.v0_mag;
      out.x(j - 1, k - 1) = xs / net.v0_mag;
    }
  }
  return out;
}

Vector compute_baseline_drop(const Matrix& r, const Matrix& x, const RadialNetwork& net) {
  if (r.rows() != net.n || x.rows() != net.n || !r.square() || !x.square()) {
    throw DimensionMismatch("impedance matrices do not match the network size");
  }
  const Vector injection = subtract(net.p_av(), net.p_e());
  const Vector qe = net.q_e();
  return subtract(r * injection, x * qe);
}

SensitivityModel build_sensitivity_model(const RadialNetwork& net) {
  Impedance z = build_impedance_matrices(net);
  SensitivityModel m;
  m.e = compute_baseline_drop(z.r, z.x, net);
  m.b = hstack(z.r, z.x);
  m.r = std::move(z.r);
  m.x = std::move(z.x);
  return m;
}

RadialNetwork generate_synthetic_feeder(std::size_t n, std::uint64_t seed,
                                        double overload_factor,
                                        const FeederOptions& options) {
  if (n == 0) throw ValidationError("synthetic feeder needs at least one bus");
  if (!(overload_factor >= 0.0)) throw ValidationError("overload factor must be >= 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  RadialNetwork net;
  net.n = n;
  net.buses.resize(n);
  for (std::size_t k = 1; k <= n; ++k) {
    int parent = 0;
    if (k > 1) {
      parent = unit(rng) < options.chain_bias
                   ? static_cast<int>(k - 1)
                   : static_cast<int>(std::min<double>(k - 1, std::floor(unit(rng) * k)));
    }
    const double r = uniform(options.r_min, options.r_max);
    const double x = r * uniform(0.5, 1.2);
    net.lines.push_back({parent, static_cast<int>(k), r, x});
  }

  Vector solar(n, 0.0);
  bool any_inverter = false;
  for (std::size_t k = 0; k < n; ++k) {
    BusData& b = net.buses[k];
    b.p_e = uniform(0.01, 0.05);
    b.q_e = b.p_e * uniform(0.2, 0.5);
    b.has_inverter = unit(rng) < options.inverter_fraction;
    const double base = uniform(0.5, 1.5);
    if (b.has_inverter) {
      solar[k] = base;
      any_inverter = true;
    }
  }
  if (!any_inverter) {
    net.buses[n - 1].has_inverter = true;
    solar[n - 1] = 1.0;
  }

  // Jointly scale the solar profile so that the uncontrolled peak deviation
  // at unit overload equals options.peak_deviation. e(s) = s*a - c with a >= 0
  // makes max_i e_i(s) nondecreasing in s, so bisection applies.
  const Impedance z = build_impedance_matrices([&] {
    RadialNetwork probe = net;
    for (auto& b : probe.buses) b.p_av = 0.0;
    return probe;
  }());
  const Vector a = z.r * solar;
  const Vector c = axpy(1.0, z.r * net.p_e(), z.x * net.q_e());
  auto peak = [&](double s) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, s * a[i] - c[i]);
    return m;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (peak(hi) < options.peak_deviation) hi *= 2.0;
  if (peak(lo) >= options.peak_deviation) hi = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (peak(mid) < options.peak_deviation ? lo : hi) = mid;
  }
  for (std::size_t k = 0; k < n; ++k) net.buses[k].p_av = overload_factor * hi * solar[k];
  return net;
}

}  // namespace gridbarrier
