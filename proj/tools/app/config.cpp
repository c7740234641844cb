#include "app/config.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <charconv>
#include <functional>
#include <sstream>

#include "shellsolve/mms.hpp"

namespace shellsolve::app {

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& v)>;

Setter real(double ExperimentConfig::*m) {
  return [m](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*m = to_double(k, v); };
}

Setter integer(int ExperimentConfig::*m) {
  return [m](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*m = to_int(k, v); };
}

template <class F>
Setter with(F f) {
  return [f](ExperimentConfig& c, const std::string& k, const std::string& v) { f(c, k, v); };
}

// Method-specific parameters are stored here until the method is known.
struct MethodParams {
  std::string name = "newton";
  double delta = 0.0;
  double radius0 = Dogleg{}.radius0;
  double radius_max = Dogleg{}.radius_max;
  double eta = Dogleg{}.eta;
};

std::map<std::string, Setter> setters(MethodParams& mp) {
  auto method_real = [&mp](double MethodParams::*m) {
    return with([&mp, m](ExperimentConfig&, const std::string& k, const std::string& v) { mp.*m = to_double(k, v); });
  };
  return {
      {"domain.bounds", with([](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const auto t = split(v);
         if (t.size() != 4) throw ConfigError("key '" + k + "' needs four numbers: x_a x_b y_a y_b");
         c.bounds = {to_double(k, t[0]), to_double(k, t[1]), to_double(k, t[2]), to_double(k, t[3])};
       })},
      {"domain.N", integer(&ExperimentConfig::N)},
      {"domain.ladder", with([](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.ladder.clear();
         for (const auto& t : split(v)) c.ladder.push_back(to_int(k, t));
       })},
      {"problem.preset", with([](ExperimentConfig& c, const std::string&, const std::string& v) { c.preset = v; })},
      {"problem.xi", real(&ExperimentConfig::xi)},
      {"bc.variant", with([](ExperimentConfig& c, const std::string&, const std::string& v) { c.bc_variant = v; })},
      {"bc.nu", real(&ExperimentConfig::nu)},
      {"bc.x_c", real(&ExperimentConfig::x_c)},
      {"bc.r_c", real(&ExperimentConfig::r_c)},
      {"bc.eps", real(&ExperimentConfig::eps)},
      {"solver.method", with([&mp](ExperimentConfig&, const std::string&, const std::string& v) { mp.name = v; })},
      {"solver.delta", method_real(&MethodParams::delta)},
      {"solver.radius0", method_real(&MethodParams::radius0)},
      {"solver.radius_max", method_real(&MethodParams::radius_max)},
      {"solver.eta", method_real(&MethodParams::eta)},
      {"solver.tol", with([](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.solver.tol = to_double(k, v);
       })},
      {"solver.max_iter", with([](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.solver.max_iter = to_int(k, v);
       })},
      {"continuation.xi0", with([](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.continuation.xi0 = to_double(k, v);
       })},
      {"continuation.ds0", with([](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.continuation.ds0 = to_double(k, v);
       })},
      {"continuation.ds_min", with([](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.continuation.ds_min = to_double(k, v);
       })},
      {"continuation.ds_max", with([](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.continuation.ds_max = to_double(k, v);
       })},
      {"continuation.max_steps", with([](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.continuation.max_steps = to_int(k, v);
       })},
      {"continuation.max_folds", with([](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.continuation.max_folds = to_int(k, v);
       })},
      {"continuation.direction", with([](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const double d = to_double(k, v);
         if (d == 0.0) throw ConfigError("key '" + k + "' must be +1 or -1");
         c.continuation.dxi_bootstrap = std::copysign(std::abs(c.continuation.dxi_bootstrap), d);
       })},
      {"continuation.tol", with([](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.continuation.corrector.tol = to_double(k, v);
       })},
      {"refine.order_min", real(&ExperimentConfig::order_min)},
      {"refine.order_max", real(&ExperimentConfig::order_max)},
      {"output.gnuplot", with([](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.gnuplot = to_bool(k, v);
       })},
  };
}

void check_preset(const std::string& p) {
  if (p == "snap-through") return;
  try {
    (void)case_from_name(p);
  } catch (const std::invalid_argument&) {
    throw ConfigError("key 'problem.preset': unknown preset '" + p + "'");
  }
}

}  // namespace

std::vector<BoundaryCondition> ExperimentConfig::boundary_conditions() const {
  std::vector<BoundaryCondition> out;
  const std::vector<std::string> names =
      bc_variant == "all" ? std::vector<std::string>{"clamped", "cf", "cs", "free", "supported"}
                          : std::vector<std::string>{bc_variant};
  for (const auto& name : names) {
    BoundaryCondition bc = bc_from_name(name);
    std::visit(
        [&](auto& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, Free>) {
            b.nu = nu;
          } else if constexpr (std::is_same_v<T, ClampedSupported>) {
            b.x_c = x_c, b.r_c = r_c, b.eps = eps;
          } else if constexpr (std::is_same_v<T, ClampedFree>) {
            b.x_c = x_c, b.r_c = r_c, b.eps = eps, b.nu = nu;
          }
        },
        bc);
    out.push_back(bc);
  }
  return out;
}

KeyValues read_config_file(const std::string& path) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::Error& e) {
    throw ConfigError("cannot read config '" + path + "': " + e.what());
  }
  KeyValues kv;
  for (const auto& it : items) {
    if (it.name == "++" || it.name == "--") continue;
    if (it.parents.size() != 1) {
      throw ConfigError("config '" + path + "': key '" + it.fullname() + "' must sit in exactly one section");
    }
    std::string value;
    for (const auto& v : it.inputs) value += (value.empty() ? "" : " ") + v;
    kv[it.parents.front() + "." + it.name] = value;
  }
  return kv;
}

ExperimentConfig build_config(const KeyValues& kv) {
  ExperimentConfig c;
  MethodParams mp;
  const auto table = setters(mp);
  for (const auto& [key, value] : kv) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(c, key, value);
  }

  try {
    if (mp.name == "picard") {
      c.solver.method = Picard{mp.delta};
    } else if (mp.name == "dogleg") {
      c.solver.method = Dogleg{mp.radius0, mp.radius_max, mp.eta};
    } else {
      c.solver.method = method_from_name(mp.name);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("key 'solver.method': ") + e.what());
  }
  check_preset(c.preset);
  if (c.bc_variant != "all") {
    try {
      (void)bc_from_name(c.bc_variant);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("key 'bc.variant': ") + e.what());
    }
  }
  if (c.ladder.empty()) throw ConfigError("key 'domain.ladder' is empty");
  if (!std::is_sorted(c.ladder.begin(), c.ladder.end()) ||
      std::adjacent_find(c.ladder.begin(), c.ladder.end()) != c.ladder.end()) {
    throw ConfigError("key 'domain.ladder' must be strictly increasing");
  }
  if (!(c.order_min < c.order_max)) throw ConfigError("keys 'refine.order_min' < 'refine.order_max' violated");

  auto guard = [](const std::string& what, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(what + ": " + e.what());
    }
  };
  guard("section [domain]", [&] {
    for (int n : c.ladder) (void)build_grid(c.bounds, n);
    (void)build_grid(c.bounds, c.N);
  });
  guard("section [solver]", [&] { validate(c.solver); });
  guard("section [continuation]", [&] { validate(c.continuation); });
  guard("section [bc]", [&] {
    for (const auto& bc : c.boundary_conditions()) {
      validate(bc, build_grid(c.bounds, c.N));
      for (int n : c.ladder) validate(bc, build_grid(c.bounds, n));
    }
  });
  return c;
}

std::vector<std::string> known_keys() {
  MethodParams mp;
  std::vector<std::string> out;
  for (const auto& [k, _] : setters(mp)) out.push_back(k);
  return out;
}

}  // namespace shellsolve::app
