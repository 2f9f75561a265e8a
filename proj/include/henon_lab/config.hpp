#pragma once

// Run configuration: one block per pipeline stage, every field optional in
// the file and defaulted here. Parsing is strict (unknown keys and wrong
// types are errors) and reports the line and dotted field path of the first
// problem. emit_run_config writes every field, so parse(emit(c)) == c.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "henon_lab/error.hpp"
#include "henon_lab/henon.hpp"
#include "henon_lab/manifold.hpp"

namespace henon_lab {

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "fixed-points", "manifold",        "tangency-quad",  "tangency-cubic", "continue-h",
      "cycle-find",   "cubic-hunt",      "rescale-verify", "resonance-scan", "cubic-map",
      "lyapunov",     "return-map",      "render"};
  return names;
}

struct ParamsConfig {
  double a = 0, b = 0;
  friend bool operator==(const ParamsConfig&, const ParamsConfig&) = default;
};

struct ManifoldConfig {
  int degree = 18;
  double arclength = 6.0;
  Rect box{-3.0, 3.0, -3.0, 3.0};
  std::string fixed_point = "both";  ///< plus, minus or both
  std::string kind = "both";         ///< stable, unstable or both
  friend bool operator==(const ManifoldConfig&, const ManifoldConfig&) = default;
};

struct TangencyConfig {
  double b = 0.02;
  double t0 = 0.0;
  std::optional<double> a0;  ///< default -2 + 2 b
  double residual_tol = 1e-10;
  double zero_tol = 1e-9;
  double nonzero_tol = 1e-4;
  double generic_tol = 1e-6;
  friend bool operator==(const TangencyConfig&, const TangencyConfig&) = default;
};

struct ContinuationConfig {
  double b_start = 0.05;
  double b_end = 0.005;
  double step = 0.005;
  double min_step = 1e-8;
  double max_step = 0.01;
  friend bool operator==(const ContinuationConfig&, const ContinuationConfig&) = default;
};

struct CycleBlock {
  int max_leaf = 3;
  double b_tol = 1e-12;
  double orbit_tol = 1e-6;
  friend bool operator==(const CycleBlock&, const CycleBlock&) = default;
};

/// Seed of a cubic homoclinic tangency, as written by cubic-hunt.
struct CubicSeed {
  std::string t, a, b;  ///< decimal strings, parsed in extended precision
  int unstable_depth = 0;
  int stable_depth = 0;
  std::string sigma_seed = "0";
  friend bool operator==(const CubicSeed&, const CubicSeed&) = default;
};

struct CubicConfig {
  double trust_radius = 0.05;
  int power = 0;  ///< 0 picks the smallest power with a fold
  int antimonotone_directions = 8;
  double antimonotone_radius = 0.1;
  std::optional<CubicSeed> seed;
  friend bool operator==(const CubicConfig&, const CubicConfig&) = default;
};

struct RescaleConfig {
  double mu_bar = 0.0;
  double nu_bar = 0.005;
  int n_first = 4;
  int count = 3;
  double epsilon = 0.1;
  int samples = 81;
  double b1_target = 0.25;
  double cubic_tol = 0.30;
  double quartic_tol = 0.40;
  double suppression = 10.0;
  friend bool operator==(const RescaleConfig&, const RescaleConfig&) = default;
};

struct ResonanceConfig {
  int max_order = 8;
  double tol = 1e-6;
  friend bool operator==(const ResonanceConfig&, const ResonanceConfig&) = default;
};

struct CubicMapConfig {
  double a = 2.8;
  long n_iter = 1'000'000;
  long transient = 10'000;
  double x0 = 0.3;
  friend bool operator==(const CubicMapConfig&, const CubicMapConfig&) = default;
};

struct LyapunovConfig {
  long n_iter = 1'000'000;
  long transient = 10'000;
  int map_power = 1;
  double divergence_delta = 1e-8;
  long orbit_dump = 1000;
  friend bool operator==(const LyapunovConfig&, const LyapunovConfig&) = default;
};

struct ReturnMapConfig {
  long n_iter = 100'000;
  long transient = 1'000;
  int m = 1;
  std::string axis = "dominant";
  int bins = 100;
  friend bool operator==(const ReturnMapConfig&, const ReturnMapConfig&) = default;
};

struct RenderConfig {
  Rect viewport{-3.0, 3.0, -3.0, 3.0};
  std::vector<std::array<double, 2>> markers;
  friend bool operator==(const RenderConfig&, const RenderConfig&) = default;
};

struct RunConfig {
  std::string command;
  std::string out = "out";
  std::uint64_t seed = 1;
  int threads = 1;
  std::optional<ParamsConfig> params;  ///< each command has its own default
  ManifoldConfig manifold;
  TangencyConfig tangency;
  ContinuationConfig continuation;
  CycleBlock cycle;
  CubicConfig cubic;
  RescaleConfig rescale;
  ResonanceConfig resonance;
  CubicMapConfig cubic_map;
  LyapunovConfig lyapunov;
  ReturnMapConfig return_map;
  RenderConfig render;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

using CJson = nlohmann::ordered_json;

/// Walks a parsed document, tracking the dotted path for diagnostics.
class ConfigReader {
 public:
  explicit ConfigReader(const std::string& text) : text_(text) {}

  [[noreturn]] void error(const std::string& path, const std::string& what) const {
    std::ostringstream os;
    const int line = line_of(path);
    if (line > 0) os << "line " << line << ": ";
    os << "field '" << path << "': " << what;
    fail(ErrorKind::invalid_config, os.str());
  }

  void object(const CJson& j, const std::string& path, std::initializer_list<const char*> keys) const {
    if (!j.is_object()) error(path, "expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!allowed.count(it.key())) error(join(path, it.key()), "unknown field");
  }

  void get(const CJson& o, const std::string& path, const char* key, double& v) const {
    if (!o.contains(key)) return;
    const CJson& j = o.at(key);
    if (!j.is_number()) error(join(path, key), "expected a number");
    v = j.get<double>();
    if (!std::isfinite(v)) error(join(path, key), "must be finite");
  }

  template <class I>
    requires std::is_integral_v<I>
  void get(const CJson& o, const std::string& path, const char* key, I& v) const {
    if (!o.contains(key)) return;
    const CJson& j = o.at(key);
    if (!j.is_number_integer()) error(join(path, key), "expected an integer");
    if constexpr (std::is_unsigned_v<I>) {
      if (j.is_number_unsigned()) v = static_cast<I>(j.get<std::uint64_t>());
      else error(join(path, key), "must be non-negative");
    } else {
      v = static_cast<I>(j.get<std::int64_t>());
    }
  }

  void get(const CJson& o, const std::string& path, const char* key, std::string& v) const {
    if (!o.contains(key)) return;
    const CJson& j = o.at(key);
    if (!j.is_string()) error(join(path, key), "expected a string");
    v = j.get<std::string>();
  }

  void get(const CJson& o, const std::string& path, const char* key, std::optional<double>& v) const {
    if (!o.contains(key)) return;
    if (o.at(key).is_null()) {
      v.reset();
      return;
    }
    double d = 0;
    get(o, path, key, d);
    v = d;
  }

  void get(const CJson& o, const std::string& path, const char* key, Rect& r) const {
    if (!o.contains(key)) return;
    const CJson& j = o.at(key);
    const std::string p = join(path, key);
    object(j, p, {"x_lo", "x_hi", "y_lo", "y_hi"});
    get(j, p, "x_lo", r.x_lo);
    get(j, p, "x_hi", r.x_hi);
    get(j, p, "y_lo", r.y_lo);
    get(j, p, "y_hi", r.y_hi);
  }

  static std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

 private:
  int line_of(const std::string& path) const {
    const std::string key = '"' + path.substr(path.rfind('.') == std::string::npos ? 0 : path.rfind('.') + 1) + '"';
    const std::size_t pos = text_.find(key);
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }

  const std::string& text_;
};

inline CJson rect_to_json(const Rect& r) { return {{"x_lo", r.x_lo}, {"x_hi", r.x_hi}, {"y_lo", r.y_lo}, {"y_hi", r.y_hi}}; }

}  // namespace detail

/// Checks ranges; reports the first violation as InvalidConfig.
inline void validate(const RunConfig& c, const std::string& text = {}) {
  const detail::ConfigReader r(text);
  auto positive = [&](const char* path, double v) {
    if (!(v > 0)) r.error(path, "must be positive");
  };
  auto at_least = [&](const char* path, long v, long lo) {
    if (v < lo) r.error(path, "must be at least " + std::to_string(lo));
  };
  auto nonempty = [&](const char* path, const Rect& box) {
    if (box.empty()) r.error(path, "box must be non-empty");
  };
  if (!c.command.empty() && std::find(command_names().begin(), command_names().end(), c.command) == command_names().end())
    r.error("command", "unknown command '" + c.command + "'");
  if (c.out.empty()) r.error("out", "must be non-empty");
  at_least("threads", c.threads, 1);

  at_least("manifold.degree", c.manifold.degree, 2);
  positive("manifold.arclength", c.manifold.arclength);
  nonempty("manifold.box", c.manifold.box);
  if (c.manifold.fixed_point != "plus" && c.manifold.fixed_point != "minus" && c.manifold.fixed_point != "both")
    r.error("manifold.fixed_point", "expected plus, minus or both");
  if (c.manifold.kind != "stable" && c.manifold.kind != "unstable" && c.manifold.kind != "both")
    r.error("manifold.kind", "expected stable, unstable or both");

  positive("tangency.residual_tol", c.tangency.residual_tol);
  positive("tangency.zero_tol", c.tangency.zero_tol);
  positive("tangency.nonzero_tol", c.tangency.nonzero_tol);
  positive("tangency.generic_tol", c.tangency.generic_tol);

  positive("continuation.step", c.continuation.step);
  positive("continuation.min_step", c.continuation.min_step);
  positive("continuation.max_step", c.continuation.max_step);
  if (c.continuation.min_step > c.continuation.max_step) r.error("continuation.min_step", "exceeds max_step");
  if (c.continuation.b_start == c.continuation.b_end) r.error("continuation.b_end", "range is empty");

  at_least("cycle.max_leaf", c.cycle.max_leaf, 0);
  positive("cycle.b_tol", c.cycle.b_tol);
  positive("cycle.orbit_tol", c.cycle.orbit_tol);

  positive("cubic.trust_radius", c.cubic.trust_radius);
  at_least("cubic.power", c.cubic.power, 0);
  at_least("cubic.antimonotone_directions", c.cubic.antimonotone_directions, 0);
  positive("cubic.antimonotone_radius", c.cubic.antimonotone_radius);

  at_least("rescale.n_first", c.rescale.n_first, 0);
  at_least("rescale.count", c.rescale.count, 3);
  positive("rescale.epsilon", c.rescale.epsilon);
  at_least("rescale.samples", c.rescale.samples, 50);
  positive("rescale.b1_target", c.rescale.b1_target);
  positive("rescale.cubic_tol", c.rescale.cubic_tol);
  positive("rescale.quartic_tol", c.rescale.quartic_tol);
  positive("rescale.suppression", c.rescale.suppression);

  at_least("resonance.max_order", c.resonance.max_order, 1);
  positive("resonance.tol", c.resonance.tol);

  if (!(c.cubic_map.a > 1.0 && c.cubic_map.a <= 3.0)) r.error("cubic_map.a", "must lie in (1, 3]");
  at_least("cubic_map.n_iter", c.cubic_map.n_iter, 1);
  at_least("cubic_map.transient", c.cubic_map.transient, 0);

  at_least("lyapunov.n_iter", c.lyapunov.n_iter, 100'000);
  at_least("lyapunov.transient", c.lyapunov.transient, 0);
  at_least("lyapunov.map_power", c.lyapunov.map_power, 1);
  positive("lyapunov.divergence_delta", c.lyapunov.divergence_delta);
  at_least("lyapunov.orbit_dump", c.lyapunov.orbit_dump, 0);

  at_least("return_map.transient", c.return_map.transient, 0);
  if (c.return_map.n_iter <= c.return_map.transient) r.error("return_map.n_iter", "must exceed transient");
  at_least("return_map.m", c.return_map.m, 1);
  at_least("return_map.bins", c.return_map.bins, 1);
  if (c.return_map.axis != "x" && c.return_map.axis != "y" && c.return_map.axis != "dominant")
    r.error("return_map.axis", "expected x, y or dominant");

  nonempty("render.viewport", c.render.viewport);
}

inline RunConfig parse_run_config(const std::string& text) {
  using detail::CJson;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) fail(ErrorKind::invalid_config, "configuration is empty");
  CJson j;
  try {
    j = CJson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte ? byte - 1 : 0), '\n');
    fail(ErrorKind::invalid_config, "line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
  const detail::ConfigReader r(text);
  RunConfig c;
  r.object(j, "", {"command", "out", "seed", "threads", "params", "manifold", "tangency", "continuation", "cycle", "cubic",
                   "rescale", "resonance", "cubic_map", "lyapunov", "return_map", "render"});
  r.get(j, "", "command", c.command);
  r.get(j, "", "out", c.out);
  r.get(j, "", "seed", c.seed);
  r.get(j, "", "threads", c.threads);
  if (j.contains("params") && !j["params"].is_null()) {
    const CJson& o = j["params"];
    r.object(o, "params", {"a", "b"});
    if (!o.contains("a") || !o.contains("b")) r.error("params", "needs both a and b");
    ParamsConfig p;
    r.get(o, "params", "a", p.a);
    r.get(o, "params", "b", p.b);
    c.params = p;
  }
  if (j.contains("manifold")) {
    const CJson& o = j["manifold"];
    r.object(o, "manifold", {"degree", "arclength", "box", "fixed_point", "kind"});
    r.get(o, "manifold", "degree", c.manifold.degree);
    r.get(o, "manifold", "arclength", c.manifold.arclength);
    r.get(o, "manifold", "box", c.manifold.box);
    r.get(o, "manifold", "fixed_point", c.manifold.fixed_point);
    r.get(o, "manifold", "kind", c.manifold.kind);
  }
  if (j.contains("tangency")) {
    const CJson& o = j["tangency"];
    r.object(o, "tangency", {"b", "t0", "a0", "residual_tol", "zero_tol", "nonzero_tol", "generic_tol"});
    r.get(o, "tangency", "b", c.tangency.b);
    r.get(o, "tangency", "t0", c.tangency.t0);
    r.get(o, "tangency", "a0", c.tangency.a0);
    r.get(o, "tangency", "residual_tol", c.tangency.residual_tol);
    r.get(o, "tangency", "zero_tol", c.tangency.zero_tol);
    r.get(o, "tangency", "nonzero_tol", c.tangency.nonzero_tol);
    r.get(o, "tangency", "generic_tol", c.tangency.generic_tol);
  }
  if (j.contains("continuation")) {
    const CJson& o = j["continuation"];
    r.object(o, "continuation", {"b_start", "b_end", "step", "min_step", "max_step"});
    r.get(o, "continuation", "b_start", c.continuation.b_start);
    r.get(o, "continuation", "b_end", c.continuation.b_end);
    r.get(o, "continuation", "step", c.continuation.step);
    r.get(o, "continuation", "min_step", c.continuation.min_step);
    r.get(o, "continuation", "max_step", c.continuation.max_step);
  }
  if (j.contains("cycle")) {
    const CJson& o = j["cycle"];
    r.object(o, "cycle", {"max_leaf", "b_tol", "orbit_tol"});
    r.get(o, "cycle", "max_leaf", c.cycle.max_leaf);
    r.get(o, "cycle", "b_tol", c.cycle.b_tol);
    r.get(o, "cycle", "orbit_tol", c.cycle.orbit_tol);
  }
  if (j.contains("cubic")) {
    const CJson& o = j["cubic"];
    r.object(o, "cubic", {"trust_radius", "power", "antimonotone_directions", "antimonotone_radius", "seed"});
    r.get(o, "cubic", "trust_radius", c.cubic.trust_radius);
    r.get(o, "cubic", "power", c.cubic.power);
    r.get(o, "cubic", "antimonotone_directions", c.cubic.antimonotone_directions);
    r.get(o, "cubic", "antimonotone_radius", c.cubic.antimonotone_radius);
    if (o.contains("seed") && !o["seed"].is_null()) {
      const CJson& s = o["seed"];
      r.object(s, "cubic.seed", {"t", "a", "b", "unstable_depth", "stable_depth", "sigma_seed"});
      for (const char* k : {"t", "a", "b"})
        if (!s.contains(k)) r.error("cubic.seed", std::string("needs ") + k);
      CubicSeed seed;
      r.get(s, "cubic.seed", "t", seed.t);
      r.get(s, "cubic.seed", "a", seed.a);
      r.get(s, "cubic.seed", "b", seed.b);
      r.get(s, "cubic.seed", "unstable_depth", seed.unstable_depth);
      r.get(s, "cubic.seed", "stable_depth", seed.stable_depth);
      r.get(s, "cubic.seed", "sigma_seed", seed.sigma_seed);
      c.cubic.seed = seed;
    }
  }
  if (j.contains("rescale")) {
    const CJson& o = j["rescale"];
    r.object(o, "rescale", {"mu_bar", "nu_bar", "n_first", "count", "epsilon", "samples", "b1_target", "cubic_tol",
                            "quartic_tol", "suppression"});
    r.get(o, "rescale", "mu_bar", c.rescale.mu_bar);
    r.get(o, "rescale", "nu_bar", c.rescale.nu_bar);
    r.get(o, "rescale", "n_first", c.rescale.n_first);
    r.get(o, "rescale", "count", c.rescale.count);
    r.get(o, "rescale", "epsilon", c.rescale.epsilon);
    r.get(o, "rescale", "samples", c.rescale.samples);
    r.get(o, "rescale", "b1_target", c.rescale.b1_target);
    r.get(o, "rescale", "cubic_tol", c.rescale.cubic_tol);
    r.get(o, "rescale", "quartic_tol", c.rescale.quartic_tol);
    r.get(o, "rescale", "suppression", c.rescale.suppression);
  }
  if (j.contains("resonance")) {
    const CJson& o = j["resonance"];
    r.object(o, "resonance", {"max_order", "tol"});
    r.get(o, "resonance", "max_order", c.resonance.max_order);
    r.get(o, "resonance", "tol", c.resonance.tol);
  }
  if (j.contains("cubic_map")) {
    const CJson& o = j["cubic_map"];
    r.object(o, "cubic_map", {"a", "n_iter", "transient", "x0"});
    r.get(o, "cubic_map", "a", c.cubic_map.a);
    r.get(o, "cubic_map", "n_iter", c.cubic_map.n_iter);
    r.get(o, "cubic_map", "transient", c.cubic_map.transient);
    r.get(o, "cubic_map", "x0", c.cubic_map.x0);
  }
  if (j.contains("lyapunov")) {
    const CJson& o = j["lyapunov"];
    r.object(o, "lyapunov", {"n_iter", "transient", "map_power", "divergence_delta", "orbit_dump"});
    r.get(o, "lyapunov", "n_iter", c.lyapunov.n_iter);
    r.get(o, "lyapunov", "transient", c.lyapunov.transient);
    r.get(o, "lyapunov", "map_power", c.lyapunov.map_power);
    r.get(o, "lyapunov", "divergence_delta", c.lyapunov.divergence_delta);
    r.get(o, "lyapunov", "orbit_dump", c.lyapunov.orbit_dump);
  }
  if (j.contains("return_map")) {
    const CJson& o = j["return_map"];
    r.object(o, "return_map", {"n_iter", "transient", "m", "axis", "bins"});
    r.get(o, "return_map", "n_iter", c.return_map.n_iter);
    r.get(o, "return_map", "transient", c.return_map.transient);
    r.get(o, "return_map", "m", c.return_map.m);
    r.get(o, "return_map", "axis", c.return_map.axis);
    r.get(o, "return_map", "bins", c.return_map.bins);
  }
  if (j.contains("render")) {
    const CJson& o = j["render"];
    r.object(o, "render", {"viewport", "markers"});
    r.get(o, "render", "viewport", c.render.viewport);
    if (o.contains("markers")) {
      const CJson& m = o["markers"];
      if (!m.is_array()) r.error("render.markers", "expected an array of [x, y] pairs");
      for (const CJson& pt : m) {
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number())
          r.error("render.markers", "expected an array of [x, y] pairs");
        c.render.markers.push_back({pt[0].get<double>(), pt[1].get<double>()});
      }
    }
  }
  validate(c, text);
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::invalid_config, "cannot read configuration file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

inline nlohmann::ordered_json emit_run_config(const RunConfig& c) {
  using detail::CJson;
  using detail::rect_to_json;
  CJson j;
  j["command"] = c.command;
  j["out"] = c.out;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["params"] = c.params ? CJson{{"a", c.params->a}, {"b", c.params->b}} : CJson(nullptr);
  j["manifold"] = {{"degree", c.manifold.degree},
                   {"arclength", c.manifold.arclength},
                   {"box", rect_to_json(c.manifold.box)},
                   {"fixed_point", c.manifold.fixed_point},
                   {"kind", c.manifold.kind}};
  j["tangency"] = {{"b", c.tangency.b},
                   {"t0", c.tangency.t0},
                   {"a0", c.tangency.a0 ? CJson(*c.tangency.a0) : CJson(nullptr)},
                   {"residual_tol", c.tangency.residual_tol},
                   {"zero_tol", c.tangency.zero_tol},
                   {"nonzero_tol", c.tangency.nonzero_tol},
                   {"generic_tol", c.tangency.generic_tol}};
  j["continuation"] = {{"b_start", c.continuation.b_start},
                       {"b_end", c.continuation.b_end},
                       {"step", c.continuation.step},
                       {"min_step", c.continuation.min_step},
                       {"max_step", c.continuation.max_step}};
  j["cycle"] = {{"max_leaf", c.cycle.max_leaf}, {"b_tol", c.cycle.b_tol}, {"orbit_tol", c.cycle.orbit_tol}};
  CJson seed(nullptr);
  if (c.cubic.seed)
    seed = {{"t", c.cubic.seed->t},
            {"a", c.cubic.seed->a},
            {"b", c.cubic.seed->b},
            {"unstable_depth", c.cubic.seed->unstable_depth},
            {"stable_depth", c.cubic.seed->stable_depth},
            {"sigma_seed", c.cubic.seed->sigma_seed}};
  j["cubic"] = {{"trust_radius", c.cubic.trust_radius},
                {"power", c.cubic.power},
                {"antimonotone_directions", c.cubic.antimonotone_directions},
                {"antimonotone_radius", c.cubic.antimonotone_radius},
                {"seed", seed}};
  j["rescale"] = {{"mu_bar", c.rescale.mu_bar},       {"nu_bar", c.rescale.nu_bar},
                  {"n_first", c.rescale.n_first},     {"count", c.rescale.count},
                  {"epsilon", c.rescale.epsilon},     {"samples", c.rescale.samples},
                  {"b1_target", c.rescale.b1_target}, {"cubic_tol", c.rescale.cubic_tol},
                  {"quartic_tol", c.rescale.quartic_tol}, {"suppression", c.rescale.suppression}};
  j["resonance"] = {{"max_order", c.resonance.max_order}, {"tol", c.resonance.tol}};
  j["cubic_map"] = {{"a", c.cubic_map.a}, {"n_iter", c.cubic_map.n_iter}, {"transient", c.cubic_map.transient},
                    {"x0", c.cubic_map.x0}};
  j["lyapunov"] = {{"n_iter", c.lyapunov.n_iter},
                   {"transient", c.lyapunov.transient},
                   {"map_power", c.lyapunov.map_power},
                   {"divergence_delta", c.lyapunov.divergence_delta},
                   {"orbit_dump", c.lyapunov.orbit_dump}};
  j["return_map"] = {{"n_iter", c.return_map.n_iter}, {"transient", c.return_map.transient}, {"m", c.return_map.m},
                     {"axis", c.return_map.axis},     {"bins", c.return_map.bins}};
  CJson markers = CJson::array();
  for (const auto& m : c.render.markers) markers.push_back({m[0], m[1]});
  j["render"] = {{"viewport", rect_to_json(c.render.viewport)}, {"markers", markers}};
  return j;
}

}  // namespace henon_lab
