#pragma once

// Subcommand orchestration: execute_command runs one pipeline from a
// RunConfig and collects every artifact in memory; write_bundle stores them
// together with a manifest of SHA-256 checksums. Payloads carry no
// timestamps, so a rerun with the same configuration reproduces them bit
// for bit.

#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "henon_lab/config.hpp"
#include "henon_lab/io.hpp"

namespace henon_lab {

struct ArtifactFile {
  std::string name;
  std::string content;
  std::string sha256;
};

struct ArtifactBundle {
  std::string run_id;
  std::string command;
  Json config;
  std::vector<ArtifactFile> files;
  std::vector<std::string> log;
  int exit_code = 0;
  std::optional<std::string> failure;

  void add(const std::string& name, std::string content) {
    ArtifactFile f{name, std::move(content), {}};
    f.sha256 = sha256_hex(f.content);
    files.push_back(std::move(f));
  }
  void add_json(const std::string& name, const Json& j) { add(name, j.dump(2) + "\n"); }

  const ArtifactFile* find(const std::string& name) const {
    for (const ArtifactFile& f : files)
      if (f.name == name) return &f;
    return nullptr;
  }

  Json payload(const std::string& name) const {
    const ArtifactFile* f = find(name);
    if (!f) fail(ErrorKind::invalid_input, "bundle has no file '" + name + "'");
    return Json::parse(f->content);
  }

  Json manifest() const {
    Json fs = Json::array();
    for (const ArtifactFile& f : files) fs.push_back({{"name", f.name}, {"bytes", f.content.size()}, {"sha256", f.sha256}});
    Json j = {{"run_id", run_id}, {"command", command}, {"exit_code", exit_code}, {"files", fs}, {"log", log}};
    if (failure) j["failure"] = *failure;
    return j;
  }
};

/// Settings that change results; out and threads do not.
inline std::string canonical_config(const RunConfig& c) {
  Json j = emit_run_config(c);
  j.erase("out");
  j.erase("threads");
  return j.dump();
}

inline std::string run_id(const RunConfig& c) { return sha256_hex(canonical_config(c)).substr(0, 16); }

namespace detail {

inline Params params_or(const RunConfig& c, Params fallback) {
  return c.params ? Params{c.params->a, c.params->b} : fallback;
}

inline Tolerances tangency_tolerances(const RunConfig& c) {
  return {c.tangency.zero_tol, c.tangency.nonzero_tol, c.tangency.generic_tol};
}

inline ContinuationOptions continuation_options(const RunConfig& c) {
  ContinuationOptions o;
  o.newton.tol = tangency_tolerances(c);
  o.newton.residual_tol = c.tangency.residual_tol;
  o.min_step = c.continuation.min_step;
  o.max_step = c.continuation.max_step;
  return o;
}

inline CycleOptions cycle_options(const RunConfig& c) {
  CycleOptions o;
  o.continuation = continuation_options(c);
  o.max_leaf = c.cycle.max_leaf;
  o.b_tol = c.cycle.b_tol;
  o.orbit_tol = c.cycle.orbit_tol;
  return o;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

struct Pipeline {
  const RunConfig& cfg;
  ArtifactBundle& out;

  void note(const std::string& line) { out.log.push_back(line); }

  ContinuationCurve curve() {
    const auto& cc = cfg.continuation;
    ContinuationCurve c = continue_quadratic_curve(cc.b_start, cc.b_end, cc.step, continuation_options(cfg));
    note("continue-h: " + std::to_string(c.samples.size()) + " samples from b = " + fmt(cc.b_start) + " to " + fmt(cc.b_end));
    out.add_json("curve.json", curve_json(c));
    std::ostringstream csv;
    write_curve_csv(csv, c);
    out.add("curve.csv", csv.str());
    return c;
  }

  CycleConfig cycle() {
    const ContinuationCurve c = curve();
    CycleConfig cyc = find_secondary_tangency(c, cycle_options(cfg));
    note("cycle-find: b0 = " + fmt(cyc.b0) + ", a0 = " + fmt(cyc.a0) + ", leaf " + std::to_string(cyc.leaf_depth) +
         ", q- velocity " + fmt(cyc.q_minus.genericity.velocity_diff.y));
    out.add_json("cycle.json", cycle_json(cyc));
    return cyc;
  }

  void fixed_points_cmd() {
    const Params p = params_or(cfg, {-2.0, 0.0});
    const auto [plus, minus] = fixed_points(p);
    auto residual = [&](const FixedPointData& fp) { return distance(apply(p, fp.location), fp.location); };
    Json j = {{"params", params_json(p)},
              {"plus", fixed_point_json(plus)},
              {"minus", fixed_point_json(minus)},
              {"residual", {{"plus", residual(plus)}, {"minus", residual(minus)}}}};
    if (p.a != 0.0 && p.b != 0.0) {
      // phi_{a,b} is conjugate to the classical map at (-a, -b).
      std::mt19937_64 rng(cfg.seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      const Params classical{-p.a, -p.b};
      double worst = 0;
      const int count = 1000;
      for (int i = 0; i < count; ++i) {
        const double x = u(rng), y = u(rng);
        worst = std::max(worst, conjugacy_residual(classical, {x, y}));
      }
      j["conjugacy"] = {{"points", count}, {"seed", cfg.seed}, {"max_residual", worst}};
    } else {
      j["conjugacy"] = nullptr;
    }
    note("fixed-points: p+ = (" + fmt(plus.location.x) + ", " + fmt(plus.location.y) + "), p- = (" +
         fmt(minus.location.x) + ", " + fmt(minus.location.y) + ")");
    out.add_json("fixed_points.json", j);
  }

  std::vector<ManifoldBranch> branches(const Params& p) {
    const auto& mc = cfg.manifold;
    const auto [plus, minus] = fixed_points(p);
    std::vector<ManifoldBranch> out_branches;
    for (const FixedPointData* fp : {&plus, &minus}) {
      if (mc.fixed_point != "both" && mc.fixed_point != to_string(fp->which)) continue;
      for (ManifoldKind kind : {ManifoldKind::unstable, ManifoldKind::stable}) {
        if (mc.kind != "both" && mc.kind != to_string(kind)) continue;
        if (kind == ManifoldKind::stable && p.b == 0.0) {
          note("manifold: skipped W^s(p" + std::string(fp->which == Branch::plus ? "+" : "-") + "), the map is not invertible at b = 0");
          continue;
        }
        for (Side side : {Side::plus_dir, Side::minus_dir})
          out_branches.push_back(grow_branch(local_parametrization(*fp, kind, mc.degree, 0, side), mc.arclength, mc.box));
      }
    }
    return out_branches;
  }

  void manifold_cmd() {
    const Params p = params_or(cfg, {-2.05, 0.05});
    const std::vector<ManifoldBranch> brs = branches(p);
    Json list = Json::array();
    for (const ManifoldBranch& br : brs) {
      const std::string name = "branch_" + to_string(br.fp().which) + "_" + to_string(br.kind()) + "_" + to_string(br.side) + ".csv";
      Json bj = branch_json(br);
      bj["file"] = name;
      if (br.kind() == ManifoldKind::unstable && p.b == 0.0 && br.fp().which == Branch::plus) {
        double worst = 0;
        for (const BranchSample& s : br.samples) worst = std::max(worst, std::abs(s.point.y - (s.point.x * s.point.x + p.a)));
        bj["parabola_deviation"] = worst;
      }
      list.push_back(std::move(bj));
      std::ostringstream csv;
      write_branch_csv(csv, br);
      out.add(name, csv.str());
    }
    const auto [plus, minus] = fixed_points(p);
    out.add_json("manifold.json", {{"params", params_json(p)},
                                   {"plus", fixed_point_json(plus)},
                                   {"minus", fixed_point_json(minus)},
                                   {"box", rect_json(cfg.manifold.box)},
                                   {"branches", std::move(list)}});
    note("manifold: " + std::to_string(brs.size()) + " branches");
  }

  void render_cmd() {
    const Params p = params_or(cfg, {-2.05, 0.05});
    const std::vector<ManifoldBranch> brs = branches(p);
    std::vector<SvgMarker> marks;
    for (const auto& m : cfg.render.markers) marks.push_back({{m[0], m[1]}, ""});
    out.add("render.svg", export_svg(brs, marks, cfg.render.viewport));
    Json list = Json::array();
    for (const ManifoldBranch& br : brs) list.push_back(branch_json(br));
    out.add_json("render.json", {{"params", params_json(p)}, {"viewport", rect_json(cfg.render.viewport)}, {"branches", list},
                                 {"markers", marks.size()}});
    note("render: " + std::to_string(brs.size()) + " branches, " + std::to_string(marks.size()) + " markers");
  }

  void tangency_quad_cmd() {
    const double b = cfg.tangency.b;
    const double a0 = cfg.tangency.a0.value_or(-2.0 + 2.0 * b);
    const TangencyRecord rec = quadratic_q_plus(b, cfg.tangency.t0, a0, continuation_options(cfg));
    out.add_json("tangency_quad.json", tangency_json(rec));
    note("tangency-quad: a = " + fmt(rec.params.a) + " at b = " + fmt(b) + ", order " + std::to_string(rec.order));
  }

  void tangency_cubic_cmd() {
    if (!cfg.cubic.seed) fail(ErrorKind::invalid_config, "field 'cubic.seed': tangency-cubic needs a seed (see cubic-hunt output)");
    const CubicSeed& s = *cfg.cubic.seed;
    HomoclinicAddress addr;
    addr.unstable_depth = s.unstable_depth;
    addr.stable_depth = s.stable_depth;
    Real t0, a0, b0;
    try {
      addr.sigma_seed = from_decimal<Real>(s.sigma_seed);
      t0 = from_decimal<Real>(s.t);
      a0 = from_decimal<Real>(s.a);
      b0 = from_decimal<Real>(s.b);
    } catch (const Error& e) {
      fail(ErrorKind::invalid_config, std::string("field 'cubic.seed': ") + e.what());
    }
    const CubicHuntOptions ho;
    CubicOptions<Real> co = ho.newton;
    co.tol = tangency_tolerances(cfg);
    BasicTangencyRecord<Real> rec = find_cubic_tangency(homoclinic_family(addr, ho.precise), t0, {a0, b0}, co);
    rec.kind = TangencyKind::homoclinic;
    rec.saddle_pair = {Branch::plus, Branch::plus};
    rec.iterate_depth = addr.unstable_depth;
    out.add_json("tangency_cubic.json", tangency_json(rec));
    note("tangency-cubic: order " + std::to_string(rec.order) + ", a = " + to_decimal(rec.params.a) + ", b = " + to_decimal(rec.params.b));
  }

  void cubic_hunt_cmd() {
    const CycleConfig cyc = cycle();
    CubicHuntOptions ho;
    ho.cycle = cycle_options(cfg);
    ho.trust_radius = cfg.cubic.trust_radius;
    ho.power = cfg.cubic.power;
    ho.newton.tol = tangency_tolerances(cfg);
    const CubicHuntResult r = locate_cubic_from_cycle(cyc, ho);
    for (const std::string& l : r.log) note("cubic-hunt: " + l);
    out.add_json("cubic.json", cubic_hunt_json(r));
    note("cubic-hunt: a1 = " + to_decimal(r.record.params.a) + ", b1 = " + to_decimal(r.record.params.b) +
         ", verification " + (r.verification.passed ? "passed" : "failed"));
    if (cfg.cubic.antimonotone_directions > 0) {
      const auto rep = antimonotone_scan(homoclinic_family(r.address, ho.precise), r.record, cfg.cubic.antimonotone_radius,
                                         cfg.cubic.antimonotone_directions, ho.newton);
      out.add_json("antimonotone.json", antimonotone_json(rep));
      note("cubic-hunt: antimonotone pairs on " + std::to_string(rep.antimonotone_count) + " of " +
           std::to_string(rep.n_directions) + " lines");
    }
  }

  void rescale_cmd() {
    const CycleConfig cyc = cycle();
    RescaleOptions ro;
    ro.scene = continuation_options(cfg).scene;
    ro.epsilon = cfg.rescale.epsilon;
    ro.samples = cfg.rescale.samples;
    ro.b1_target = cfg.rescale.b1_target;
    const RescaleSetup st = make_rescale_setup(cyc, ro);
    const auto& rc = cfg.rescale;
    std::vector<RescaledCurve> curves(static_cast<std::size_t>(rc.count));
    auto work = [&](int k) { return rescaled_curve(st, Real(rc.mu_bar), Real(rc.nu_bar), rc.n_first + k); };
    if (cfg.threads > 1) {
      for (int k0 = 0; k0 < rc.count; k0 += cfg.threads) {
        std::vector<std::future<RescaledCurve>> jobs;
        for (int k = k0; k < std::min(rc.count, k0 + cfg.threads); ++k) jobs.push_back(std::async(std::launch::async, work, k));
        for (int k = k0; k < std::min(rc.count, k0 + cfg.threads); ++k)
          curves[static_cast<std::size_t>(k)] = jobs[static_cast<std::size_t>(k - k0)].get();
      }
    } else {
      for (int k = 0; k < rc.count; ++k) curves[static_cast<std::size_t>(k)] = work(k);
    }
    const RescaleReport rep = fit_limit_form(curves, {0.05, rc.cubic_tol, rc.quartic_tol, rc.suppression});
    for (const RescaledCurve& c : curves) {
      std::ostringstream csv;
      write_rescale_csv(csv, c);
      out.add("rescale_n" + std::to_string(c.n) + ".csv", csv.str());
    }
    Json j = rescale_report_json(rep);
    j["setup"] = rescale_setup_json(st);
    out.add_json("rescale.json", j);
    note(std::string("rescale-verify: ") + (rep.insufficient_decay ? "insufficient decay" : "decay rates as predicted"));
    for (const std::string& d : rep.diagnostics) note("rescale-verify: " + d);
  }

  void resonance_cmd() {
    const auto& rc = cfg.resonance;
    Params p;
    if (cfg.params) {
      p = {cfg.params->a, cfg.params->b};
    } else {
      const CycleConfig cyc = cycle();
      p = {cyc.a0, cyc.b0};
    }
    const auto [plus, minus] = fixed_points(p);
    const ResonanceReport rp = resonance_scan(plus, rc.max_order, rc.tol);
    const ResonanceReport rm = resonance_scan(minus, rc.max_order, rc.tol);
    out.add_json("resonance.json", {{"params", params_json(p)}, {"plus", resonance_json(rp)}, {"minus", resonance_json(rm)}});
    note("resonance-scan: clean up to order " + std::to_string(rm.clean_up_to) + " at p-, " + std::to_string(rp.clean_up_to) +
         " at p+");
  }

  void cubic_map_cmd() {
    const auto& c = cfg.cubic_map;
    const CubicMapReport r = cubic_map_analysis(c.a, c.n_iter, c.transient, c.x0);
    const CubicMapReport mirror = cubic_map_analysis(c.a, c.n_iter, c.transient, -c.x0);
    Json j = cubic_map_json(r);
    j["lyapunov_mirror_seed"] = mirror.lyapunov;
    out.add_json("cubic_map.json", j);
    note("cubic-map: lyapunov " + fmt(r.lyapunov));
  }

  void lyapunov_cmd() {
    const Params p = params_or(cfg, {-1.4, -0.3});
    const auto& lc = cfg.lyapunov;
    OrbitOptions oo;
    oo.map_power = lc.map_power;
    oo.divergence_delta = lc.divergence_delta;
    const OrbitStats s = henon_lyapunov(p, lc.n_iter, lc.transient, oo);
    out.add_json("lyapunov.json", orbit_stats_json(s));
    if (lc.orbit_dump > 0) {
      const auto start = detail::settle(p, s.seed, lc.transient, lc.map_power, oo.escape_radius);
      std::ostringstream csv;
      write_orbit_csv(csv, p, *start, lc.orbit_dump);
      out.add("orbit.csv", csv.str());
    }
    note("lyapunov: max " + fmt(s.lyapunov_max) + ", divergence estimate " + fmt(s.divergence_max) + ", sum " + fmt(s.lyapunov_sum));
  }

  void return_map_cmd() {
    const Params p = params_or(cfg, {-1.4, -0.3});
    const auto& rc = cfg.return_map;
    ReturnMapOptions ro;
    ro.m = rc.m;
    ro.bins = rc.bins;
    ro.axis = rc.axis == "x" ? ReturnAxis::x : rc.axis == "y" ? ReturnAxis::y : ReturnAxis::dominant;
    const ReturnMapData r = return_map_extract(p, rc.n_iter, rc.transient, ro);
    out.add_json("return_map.json", return_map_json(r));
    std::ostringstream csv;
    write_return_map_csv(csv, r);
    out.add("return_map.csv", csv.str());
    note("return-map: " + std::to_string(r.u.size()) + " samples, cubic fit rms " + fmt(r.cubic_rms));
  }
};

}  // namespace detail

/// Runs the configured command. Solver failures become exit code 2 with a
/// failure.json artifact; an invalid configuration throws InvalidConfig.
inline ArtifactBundle execute_command(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.command.empty()) fail(ErrorKind::invalid_config, "field 'command': no command given");
  ArtifactBundle b;
  b.command = cfg.command;
  b.run_id = run_id(cfg);
  b.config = emit_run_config(cfg);
  b.add_json("config.json", b.config);
  detail::Pipeline run{cfg, b};
  const std::map<std::string, std::function<void()>> table = {
      {"fixed-points", [&] { run.fixed_points_cmd(); }}, {"manifold", [&] { run.manifold_cmd(); }},
      {"tangency-quad", [&] { run.tangency_quad_cmd(); }}, {"tangency-cubic", [&] { run.tangency_cubic_cmd(); }},
      {"continue-h", [&] { run.curve(); }},                {"cycle-find", [&] { run.cycle(); }},
      {"cubic-hunt", [&] { run.cubic_hunt_cmd(); }},       {"rescale-verify", [&] { run.rescale_cmd(); }},
      {"resonance-scan", [&] { run.resonance_cmd(); }},    {"cubic-map", [&] { run.cubic_map_cmd(); }},
      {"lyapunov", [&] { run.lyapunov_cmd(); }},           {"return-map", [&] { run.return_map_cmd(); }},
      {"render", [&] { run.render_cmd(); }}};
  try {
    table.at(cfg.command)();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid_config) throw;
    b.exit_code = 2;
    b.failure = e.what();
    b.log.push_back(std::string("failed: ") + e.what());
    b.add_json("failure.json", {{"command", cfg.command}, {"kind", std::string(to_string(e.kind()))}, {"message", e.what()}});
  }
  return b;
}

/// Writes every artifact and bundle.json into dir.
inline void write_bundle(const ArtifactBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) fail(ErrorKind::invalid_input, "cannot write " + (dir / name).string());
    f << content;
  };
  for (const ArtifactFile& f : b.files) put(f.name, f.content);
  put("bundle.json", b.manifest().dump(2) + "\n");
}

}  // namespace henon_lab
