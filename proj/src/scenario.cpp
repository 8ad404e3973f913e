#include "gridbarrier/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace gridbarrier {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Cursor {
  int line = 0;
  std::string section;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(line) + ": " + msg);
  }

  double real(const std::string& key, const std::string& v) const {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) {
      fail("'" + key + "' expects a number, got '" + v + "'");
    }
    return d;
  }

  std::uint64_t count(const std::string& key, const std::string& v) const {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
      fail("'" + key + "' expects a non-negative integer, got '" + v + "'");
    }
    try {
      return std::stoull(v);
    } catch (const std::exception&) {
      fail("'" + key + "' is out of range");
    }
  }

  bool flag(const std::string& key, const std::string& v) const {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail("'" + key + "' expects true or false, got '" + v + "'");
  }
};

using Setter = std::function<void(const Cursor&, const std::string&, const std::string&)>;

}  // namespace

void validate(const Scenario& s) {
  const NetworkSpec& n = s.network;
  const bool has_file = n.file.has_value();
  const bool has_synth = n.synthetic_n > 0;
  if (has_file == has_synth) {
    throw ValidationError("network: give exactly one of 'file' or 'synthetic_n'");
  }
  if (!(n.overload_factor >= 0.0)) throw ValidationError("network.overload_factor must be >= 0");
  if (!(n.v0_mag > 0.0)) throw ValidationError("network.v0_mag must be > 0");
  if (!(n.nominal_kv > 0.0)) throw ValidationError("network.nominal_kv must be > 0");

  std::set<std::string> names;
  for (const EstimateSpec& e : s.estimates) {
    if (e.name.empty()) throw ValidationError("estimate sections need a name");
    if (!names.insert(e.name).second) throw ValidationError("duplicate estimate '" + e.name + "'");
    if (!(e.magnitude >= 0.0 && e.magnitude < 1.0)) {
      throw ValidationError("estimate " + e.name + ": magnitude must lie in [0, 1)");
    }
    if (e.target_relative_error && !(*e.target_relative_error >= 0.0)) {
      throw ValidationError("estimate " + e.name + ": target_relative_error must be >= 0");
    }
    if (e.transpositions < 0) throw ValidationError("estimate " + e.name + ": transpositions must be >= 0");
    if (!(e.eps_scale >= 1.0)) throw ValidationError("estimate " + e.name + ": eps_scale must be >= 1");
  }

  const ControllerSpec& c = s.controller;
  if (!(c.beta > 0.0)) throw ValidationError("controller.beta must be > 0");
  if (!(c.kappa > 0.0 && c.kappa <= 1.0)) throw ValidationError("controller.kappa must lie in (0, 1]");
  if (!(c.c_p > 0.0) || !(c.c_q > 0.0)) throw ValidationError("controller.c_p and c_q must be > 0");
  if (!(c.x_bar_percent > 0.0 && c.x_bar_percent <= 20.0)) {
    throw ValidationError("controller.x_bar_percent must lie in (0, 20]");
  }
  if (c.max_iterations == 0) throw ValidationError("controller.max_iterations must be >= 1");
  if (c.eta && !(*c.eta > 0.0)) throw ValidationError("controller.eta must be > 0");
  if (!(c.step_scale > 0.0 && c.step_scale < 2.0)) {
    throw ValidationError("controller.step_scale must lie in (0, 2)");
  }
  if (!(c.tolerance > 0.0)) throw ValidationError("controller.tolerance must be > 0");
  if (!(c.switch_guard >= 0.0)) throw ValidationError("controller.switch_guard must be >= 0");

  if (!(s.limits.reactive_fraction >= 0.0)) throw ValidationError("limits.reactive_fraction must be >= 0");

  const BaselineSpec& b = s.baselines;
  if (!(b.pd_eta_p > 0.0) || !(b.pd_eta_d > 0.0)) throw ValidationError("baselines: pd step sizes must be > 0");
  if (!(b.pd_reg >= 0.0)) throw ValidationError("baselines.pd_reg must be >= 0");
  if (b.pd_max_iterations && *b.pd_max_iterations == 0) {
    throw ValidationError("baselines.pd_max_iterations must be >= 1");
  }
}

Scenario parse_scenario(std::istream& in, const std::string& base_dir) {
  Scenario s;
  Cursor cur;
  EstimateSpec* est = nullptr;
  std::set<std::string> seen;  // "section.key"

  const std::map<std::string, std::map<std::string, Setter>> table = [&] {
    std::map<std::string, std::map<std::string, Setter>> t;
    auto& sc = t["scenario"];
    sc["name"] = [&](const Cursor&, const std::string&, const std::string& v) { s.name = v; };

    auto& nw = t["network"];
    nw["file"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      if (v.empty()) c.fail("'" + k + "' is empty");
      std::filesystem::path p(v);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      s.network.file = p.lexically_normal().string();
    };
    nw["synthetic_n"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.network.synthetic_n = c.count(k, v);
    };
    nw["synthetic_seed"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.network.synthetic_seed = c.count(k, v);
    };
    nw["overload_factor"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.network.overload_factor = c.real(k, v);
    };
    nw["v0_mag"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.network.v0_mag = c.real(k, v);
    };
    nw["nominal_kv"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.network.nominal_kv = c.real(k, v);
    };

    auto& es = t["estimate"];
    es["kind"] = [&](const Cursor& c, const std::string&, const std::string& v) {
      try {
        est->kind = parse_perturbation_kind(v);
      } catch (const Error& e) {
        c.fail(e.what());
      }
    };
    es["magnitude"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      est->magnitude = c.real(k, v);
    };
    es["target_relative_error"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      est->target_relative_error = c.real(k, v);
    };
    es["seed"] = [&](const Cursor& c, const std::string& k, const std::string& v) { est->seed = c.count(k, v); };
    es["transpositions"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      const auto t = c.count(k, v);
      if (t > 1000) c.fail("'" + k + "' is too large");
      est->transpositions = static_cast<int>(t);
    };
    es["eps_scale"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      est->eps_scale = c.real(k, v);
    };

    auto& ct = t["controller"];
    ct["beta"] = [&](const Cursor& c, const std::string& k, const std::string& v) { s.controller.beta = c.real(k, v); };
    ct["kappa"] = [&](const Cursor& c, const std::string& k, const std::string& v) { s.controller.kappa = c.real(k, v); };
    ct["c_p"] = [&](const Cursor& c, const std::string& k, const std::string& v) { s.controller.c_p = c.real(k, v); };
    ct["c_q"] = [&](const Cursor& c, const std::string& k, const std::string& v) { s.controller.c_q = c.real(k, v); };
    ct["x_bar_percent"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.controller.x_bar_percent = c.real(k, v);
    };
    ct["max_iterations"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.controller.max_iterations = c.count(k, v);
    };
    ct["eta"] = [&](const Cursor& c, const std::string& k, const std::string& v) { s.controller.eta = c.real(k, v); };
    ct["step_scale"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.controller.step_scale = c.real(k, v);
    };
    ct["tolerance"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.controller.tolerance = c.real(k, v);
    };
    ct["switch_guard"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.controller.switch_guard = c.real(k, v);
    };
    ct["ratchet_weights"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.controller.ratchet_weights = c.flag(k, v);
    };

    auto& lm = t["limits"];
    lm["reactive_fraction"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.limits.reactive_fraction = c.real(k, v);
    };
    lm["upper_zero"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.limits.upper_zero = c.flag(k, v);
    };

    auto& bl = t["baselines"];
    bl["lcqp"] = [&](const Cursor& c, const std::string& k, const std::string& v) { s.baselines.lcqp = c.flag(k, v); };
    bl["primal_dual"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.baselines.primal_dual = c.flag(k, v);
    };
    bl["pd_eta_p"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.baselines.pd_eta_p = c.real(k, v);
    };
    bl["pd_eta_d"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.baselines.pd_eta_d = c.real(k, v);
    };
    bl["pd_reg"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.baselines.pd_reg = c.real(k, v);
    };
    bl["pd_max_iterations"] = [&](const Cursor& c, const std::string& k, const std::string& v) {
      s.baselines.pd_max_iterations = c.count(k, v);
    };
    return t;
  }();

  std::string raw;
  while (std::getline(in, raw)) {
    ++cur.line;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') cur.fail("unterminated section header");
      std::istringstream words(line.substr(1, line.size() - 2));
      std::string head, name, extra;
      words >> head >> name >> extra;
      if (!table.count(head)) cur.fail("unknown section [" + head + "]");
      if (!extra.empty()) cur.fail("section header has extra words");
      if (head == "estimate") {
        if (name.empty()) cur.fail("[estimate] needs a name, e.g. [estimate B1]");
        s.estimates.push_back(EstimateSpec{});
        est = &s.estimates.back();
        est->name = name;
        cur.section = "estimate " + name;
      } else {
        if (!name.empty()) cur.fail("[" + head + "] takes no name");
        est = nullptr;
        cur.section = head;
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) cur.fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (cur.section.empty()) cur.fail("'" + key + "' appears before any section");
    const std::string head = est ? "estimate" : cur.section;
    const auto& keys = table.at(head);
    const auto it = keys.find(key);
    if (it == keys.end()) cur.fail("unknown key '" + key + "' in [" + cur.section + "]");
    if (!seen.insert(cur.section + "." + key).second) {
      cur.fail("duplicate key '" + key + "' in [" + cur.section + "]");
    }
    it->second(cur, key, value);
  }
  validate(s);
  return s;
}

void override_seeds(Scenario& s, std::uint64_t seed) {
  s.network.synthetic_seed = seed;
  for (std::size_t k = 0; k < s.estimates.size(); ++k) s.estimates[k].seed = seed + 1 + k;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open scenario file " + path);
  const std::string dir = std::filesystem::path(path).parent_path().string();
  Scenario s = parse_scenario(in, dir.empty() ? "." : dir);
  if (const char* env = std::getenv("GRIDBARRIER_SEED"); env && *env) {
    const std::string v(env);
    if (v.find_first_not_of("0123456789") != std::string::npos) {
      throw ValidationError("GRIDBARRIER_SEED must be a non-negative integer");
    }
    override_seeds(s, std::stoull(v));
  }
  return s;
}

std::string format_scenario(const Scenario& s) {
  std::ostringstream o;
  auto kv = [&](const std::string& k, const std::string& v) { o << k << " = " << v << "\n"; };
  auto yn = [](bool b) { return std::string(b ? "true" : "false"); };

  o << "[scenario]\n";
  kv("name", s.name);

  o << "\n[network]\n";
  if (s.network.file) kv("file", *s.network.file);
  if (s.network.synthetic_n > 0) {
    kv("synthetic_n", std::to_string(s.network.synthetic_n));
    kv("synthetic_seed", std::to_string(s.network.synthetic_seed));
  }
  kv("overload_factor", fmt(s.network.overload_factor));
  kv("v0_mag", fmt(s.network.v0_mag));
  kv("nominal_kv", fmt(s.network.nominal_kv));

  for (const EstimateSpec& e : s.estimates) {
    o << "\n[estimate " << e.name << "]\n";
    kv("kind", to_string(e.kind));
    kv("magnitude", fmt(e.magnitude));
    if (e.target_relative_error) kv("target_relative_error", fmt(*e.target_relative_error));
    kv("seed", std::to_string(e.seed));
    kv("transpositions", std::to_string(e.transpositions));
    kv("eps_scale", fmt(e.eps_scale));
  }

  const ControllerSpec& c = s.controller;
  o << "\n[controller]\n";
  kv("beta", fmt(c.beta));
  kv("kappa", fmt(c.kappa));
  kv("c_p", fmt(c.c_p));
  kv("c_q", fmt(c.c_q));
  kv("x_bar_percent", fmt(c.x_bar_percent));
  kv("max_iterations", std::to_string(c.max_iterations));
  if (c.eta) kv("eta", fmt(*c.eta));
  kv("step_scale", fmt(c.step_scale));
  kv("tolerance", fmt(c.tolerance));
  kv("switch_guard", fmt(c.switch_guard));
  kv("ratchet_weights", yn(c.ratchet_weights));

  o << "\n[limits]\n";
  kv("reactive_fraction", fmt(s.limits.reactive_fraction));
  kv("upper_zero", yn(s.limits.upper_zero));

  const BaselineSpec& b = s.baselines;
  o << "\n[baselines]\n";
  kv("lcqp", yn(b.lcqp));
  kv("primal_dual", yn(b.primal_dual));
  kv("pd_eta_p", fmt(b.pd_eta_p));
  kv("pd_eta_d", fmt(b.pd_eta_d));
  kv("pd_reg", fmt(b.pd_reg));
  if (b.pd_max_iterations) kv("pd_max_iterations", std::to_string(*b.pd_max_iterations));
  return o.str();
}

}  // namespace gridbarrier
