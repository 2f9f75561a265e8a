// End-to-end checks, one line per criterion. Exit status is nonzero when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "henon_lab/attractor.hpp"
#include "henon_lab/commands.hpp"
#include "henon_lab/continuation.hpp"
#include "henon_lab/rescale.hpp"
#include "henon_lab/resonance.hpp"

using namespace henon_lab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::ostringstream os;
  os.precision(3);
  os << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << title << "  [" << o.detail << "; "
     << std::fixed << secs << " s]";
  std::cout << os.str() << std::endl;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Shared by criteria 5 to 9 and 12.
struct Chain {
  ContinuationCurve curve;
  CycleConfig cycle;
  std::optional<CubicHuntResult> cubic;
};

Chain& chain() {
  static Chain c = [] {
    Chain out;
    out.curve = continue_quadratic_curve(0.05, 0.005, 0.005);
    out.cycle = find_secondary_tangency(out.curve);
    return out;
  }();
  return c;
}

const CubicHuntResult& cubic() {
  Chain& c = chain();
  if (!c.cubic) c.cubic = locate_cubic_from_cycle(c.cycle);
  return *c.cubic;
}

using J = Jet<kJetOrder>;

// Synthetic cusp: (t, (t - 0.5)^3 + a (t - 0.5) + b - 0.2) against y = 0.
GapContext cusp(const Params& p) {
  GapContext ctx;
  ctx.unstable = [p](const double& t0) {
    const J t = J::variable(t0);
    const J u = t - 0.5;
    return CurveGerm{t, u * u * u + p.a * u + (p.b - 0.2)};
  };
  ctx.stable = [](const double&) { return J(0.0); };
  ctx.x_lo = ctx.t_lo = -5;
  ctx.x_hi = ctx.t_hi = 5;
  ctx.params = p;
  return ctx;
}

GapContext reparametrized(const GapContext& ctx, double t0, double c1, double c2) {
  GapContext out = ctx;
  out.unstable = [ctx, t0, c1, c2](const double& s0) {
    const J s = J::variable(s0);
    const J r = t0 + c1 * s + c2 * s * s;
    const CurveGerm g = ctx.unstable(r.value());
    return CurveGerm{compose(g.x, r), compose(g.y, r)};
  };
  out.t_lo = -1;
  out.t_hi = 1;
  return out;
}

int sign(double v) { return (v > 0) - (v < 0); }

Outcome jet_vs_fd() {
  const Params p{-1.93, 0.03};
  auto curve = [](double t) { return Point2{0.3 + t, -0.2 + 0.5 * t + 0.1 * t * t}; };
  double worst = 0;
  for (int k : {1, 3, 5}) {
    const double t0 = 0.05;
    const J t = J::variable(t0);
    const CurveGerm g = iterate(p, CurveGerm{0.3 + t, -0.2 + 0.5 * t + 0.1 * t * t}, k);
    const double h1 = 1e-5, h2 = 1e-4;
    const Point2 pp = iterate(p, curve(t0 + h1), k), pm = iterate(p, curve(t0 - h1), k);
    const Point2 qp = iterate(p, curve(t0 + h2), k), qm = iterate(p, curve(t0 - h2), k), q0 = iterate(p, curve(t0), k);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    worst = std::max({worst, rel(g.x.derivative(1), (pp.x - pm.x) / (2 * h1)), rel(g.y.derivative(1), (pp.y - pm.y) / (2 * h1)),
                      rel(g.x.derivative(2), (qp.x - 2 * q0.x + qm.x) / (h2 * h2)),
                      rel(g.y.derivative(2), (qp.y - 2 * q0.y + qm.y) / (h2 * h2))});
  }
  return {worst < 1e-6, "jet vs FD max rel " + fmt(worst)};
}

Outcome reparam_invariance() {
  bool ok = true;
  const GapFamily<double> fam = cusp;
  const TangencyRecord rec = find_cubic_tangency(fam, 0.6, Params{0.05, 0.15});
  for (double c1 : {0.7, -0.7}) {
    const GapContext r = reparametrized(fam(rec.params), rec.t_star, c1, 0.2);
    const GapJet<double> g = gap_jet(r, 0.0);
    ok = ok && classify_order(r, 0.0, cubic_feature_scales(g, 1.0)) == 2 &&
         sign(g.derivative(3)) == sign(rec.g_derivs[3]) * sign(c1);
  }
  const TangencyRecord q = quadratic_q_plus(0.02, 0.0, -1.96);
  const GapContext ctx = q_plus_context(make_scene(q.params, without_leaves(SceneOptions{})));
  for (double c1 : {0.5, -0.5}) {
    const GapContext r = reparametrized(ctx, q.t_star, c1, 0.1);
    const GapJet<double> g = gap_jet(r, 0.0);
    ok = ok && classify_order(r, 0.0, FeatureScales<double>{1 / std::abs(c1), 1.0}) == 1 &&
         sign(g.derivative(2)) == sign(q.g_derivs[2]);
  }
  return {ok, std::string("order and signs under reparametrization ") + (ok ? "invariant" : "changed")};
}

Outcome reverification() {
  const TangencyRecord a = quadratic_q_plus(0.02, 0.0, -1.96);
  const TangencyRecord b = quadratic_q_plus(0.02, 0.03, a.params.a + 0.005);
  const bool quad = std::abs(a.params.a - b.params.a) < 1e-10;
  const bool cub = cubic().verification.passed;
  return {quad && cub, std::string("quadratic reseed ") + (quad ? "agrees" : "differs") + ", cubic rebuild " +
                           (cub ? "passed" : "failed")};
}

Outcome determinism() {
  bool ok = true;
  for (const char* cmd : {"fixed-points", "lyapunov", "manifold", "cubic-map"}) {
    RunConfig c;
    c.command = cmd;
    c.lyapunov.n_iter = 200000;
    c.cubic_map.n_iter = 200000;
    const ArtifactBundle x = execute_command(c);
    c.out = "other";
    c.threads = 2;
    const ArtifactBundle y = execute_command(c);
    ok = ok && x.run_id == y.run_id && x.files.size() == y.files.size();
    for (std::size_t i = 0; ok && i < x.files.size(); ++i)
      if (x.files[i].name != "config.json") ok = x.files[i].sha256 == y.files[i].sha256;
  }
  bool rejects = false;
  try {
    parse_run_config("");
  } catch (const Error& e) {
    rejects = e.kind() == ErrorKind::invalid_config;
  }
  ok = ok && rejects;
  return {ok, std::string("bundles ") + (ok ? "reproducible" : "differ") + ", empty config " + (rejects ? "rejected" : "accepted")};
}

}  // namespace

int main() {
  report(1, "fixed points at (-2, 0)", [] {
    RunConfig c;
    c.command = "fixed-points";
    const ArtifactBundle b = execute_command(c);
    const auto [plus, minus] = fixed_points(Params{-2.0, 0.0});
    const double r = std::max(distance(apply(Params{-2, 0}, plus.location), plus.location),
                              distance(apply(Params{-2, 0}, minus.location), minus.location));
    const bool ok = b.exit_code == 0 && distance(plus.location, {2, 2}) < 1e-12 && distance(minus.location, {-1, -1}) < 1e-12 &&
                    r < 1e-12;
    return Outcome{ok, "p+ = (" + fmt(plus.location.x) + ", " + fmt(plus.location.y) + "), p- = (" + fmt(minus.location.x) +
                           ", " + fmt(minus.location.y) + "), residual " + fmt(r)};
  });

  report(2, "eigenvalue limits at (-2, b)", [] {
    double prev[4] = {INFINITY, INFINITY, INFINITY, INFINITY};
    bool ok = true;
    std::string d;
    for (double b : {1e-2, 1e-3, 1e-4}) {
      const auto [plus, minus] = fixed_points(Params{-2.0, b});
      const double v[4] = {std::abs(plus.sigma - 4), std::abs(plus.lambda), std::abs(minus.sigma + 2), std::abs(minus.lambda)};
      for (int k = 0; k < 4; ++k) {
        ok = ok && v[k] < 10 * b && v[k] < prev[k];
        prev[k] = v[k];
      }
      d += "b=" + fmt(b) + ": |s+-4|=" + fmt(v[0]) + " ";
    }
    return Outcome{ok, d + "(all four monotone, < 10 b)"};
  });

  report(3, "conjugacy identity at 1000 points", [] {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.5, 1.5), ua(1.0, 2.1), ub(0.05, 0.4);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const Params p{ua(rng), (i % 2 ? 1 : -1) * ub(rng)};
      worst = std::max(worst, conjugacy_residual(p, Point2{u(rng), u(rng)}));
    }
    return Outcome{worst < 1e-12, "max residual " + fmt(worst)};
  });

  report(4, "W^u(p+) at b = 0 is y = x^2 - 2 on [-2, 3]", [] {
    const Params p{-2.0, 0.0};
    const auto [plus, minus] = fixed_points(p);
    double worst = 0, lo = INFINITY, hi = -INFINITY;
    for (Side s : {Side::plus_dir, Side::minus_dir}) {
      const ManifoldBranch br = grow_branch(local_parametrization(plus, ManifoldKind::unstable, 18, 0, s), 40.0,
                                            Rect{-2.5, 3.5, -3.0, 8.0});
      for (const BranchSample& smp : br.samples) {
        if (smp.point.x >= -2.0 && smp.point.x <= 3.0)
          worst = std::max(worst, std::abs(smp.point.y - (smp.point.x * smp.point.x - 2.0)));
        lo = std::min(lo, smp.point.x);
        hi = std::max(hi, smp.point.x);
      }
    }
    return Outcome{worst < 1e-10 && lo <= -2.0 + 1e-3 && hi >= 3.0,
                   "max deviation " + fmt(worst) + ", x covered [" + fmt(lo) + ", " + fmt(hi) + "]"};
  });

  report(5, "quadratic tangency curve h(b) on [0.005, 0.05]", [] {
    const auto& s = chain().curve.samples;
    double worst = 0;
    for (const ContinuationSample& c : s) worst = std::max(worst, c.residual);
    const ContinuationSample& end = s.back();
    const double target = -8.0 / 3.0;
    const bool ok = worst < 1e-9 && end.b == 0.005 && std::abs(end.a + 2) < 0.05 &&
                    std::abs(end.velocity_a - target) <= 0.3 * std::abs(target);
    return Outcome{ok, std::to_string(s.size()) + " samples, max residual " + fmt(worst) + ", h(0.005) = " + fmt(end.a) +
                           ", dg/da = " + fmt(end.velocity_a) + " vs -8/3"};
  });

  report(6, "heteroclinic cycle and q- velocity", [] {
    const CycleConfig& c = chain().cycle;
    const double v = c.q_minus.genericity.velocity_diff.y, target = -6 * std::sqrt(2.0);
    const bool ok = c.b0 > 0 && c.b0 < 0.05 && c.q_plus.order == 1 && c.q_minus.order == 1 && c.q_plus.genericity.certified &&
                    c.q_minus.genericity.certified && std::abs(v - target) <= 0.3 * std::abs(target);
    return Outcome{ok, "b0 = " + fmt(c.b0) + ", a0 = " + fmt(c.a0) + ", leaf " + std::to_string(c.leaf_depth) +
                           ", velocity " + fmt(v) + " vs " + fmt(target)};
  });

  report(7, "cubic homoclinic tangency certificate", [] {
    const CubicHuntResult& h = cubic();
    const auto& r = h.record;
    const CycleConfig& c = chain().cycle;
    double res = 0;
    for (const Real& v : r.relative_residual) res = std::max(res, to_double(v));
    const bool inside = r.params.b > 0 && abs(r.params.a - Real(c.a0)) < Real(0.05) && abs(r.params.b - Real(c.b0)) < Real(0.05);
    const bool ok = inside && res < 1e-9 && r.relative_g3 > Real(1e-3) && r.genericity.certified && h.verification.passed;
    return Outcome{ok, "a1 = " + to_decimal(r.params.a).substr(0, 16) + ", b1 = " + to_decimal(r.params.b).substr(0, 16) +
                           ", residual " + fmt(res) + ", g''' ratio " + fmt(to_double(r.relative_g3)) + ", det " +
                           fmt(to_double(r.genericity.det_normalized)) + ", rebuild " +
                           (h.verification.passed ? "passed" : "failed")};
  });

  report(8, "rescaled curve decay rates", [] {
    const RescaleSetup st = make_rescale_setup(chain().cycle);
    const RescaleReport rep = rescale_verify(st, Real(0), Real(0.005), 4, 3);
    const double ct = 1 / std::sqrt(rep.sigma), qt = 1 / rep.sigma;
    bool ok = !rep.cubic_ratios.empty();
    std::string d = "cubic";
    for (double v : rep.cubic_ratios) {
      ok = ok && std::abs(v - ct) <= 0.3 * ct;
      d += " " + fmt(v);
    }
    d += " vs " + fmt(ct) + "; quartic";
    for (double v : rep.quartic_ratios) {
      ok = ok && std::abs(v - qt) <= 0.4 * qt;
      d += " " + fmt(v);
    }
    d += " vs " + fmt(qt) + "; suppression";
    for (double v : rep.suppression) {
      ok = ok && v >= 10;
      d += " " + fmt(v);
    }
    return Outcome{ok, d};
  });

  report(9, "resonance diagnostics at the cycle", [] {
    const CycleConfig& c = chain().cycle;
    const auto [plus, minus] = fixed_points(Params{c.a0, c.b0});
    const ResonanceReport rm = resonance_scan(minus, 8, 1e-6), rp = resonance_scan(plus, 8, 1e-6);
    const bool clean = rm.clean_up_to >= 8 && rp.clean_up_to >= 4;
    const bool itemized = !rm.hits.empty() || !rp.hits.empty();
    return Outcome{clean || itemized, "p- clean to " + std::to_string(rm.clean_up_to) + ", p+ clean to " +
                                          std::to_string(rp.clean_up_to) + ", " +
                                          std::to_string(rm.hits.size() + rp.hits.size()) + " hits itemized"};
  });

  report(10, "cubic model at a = 2.8", [] {
    const CubicMapReport r = cubic_map_analysis(2.8, 1000000, 10000, 0.3);
    const CubicMapReport m = cubic_map_analysis(2.8, 1000000, 10000, -0.3);
    const double x0 = 1.34164078649987;
    bool ok = std::abs(r.fixed_points[0]) < 1e-9 && std::abs(r.fixed_points[1] - x0) < 1e-9 &&
              std::abs(r.fixed_points[2] + x0) < 1e-9 && std::abs(r.multipliers[0] - 2.8) < 1e-9 &&
              std::abs(r.multipliers[1] + 2.6) < 1e-9 && std::abs(r.multipliers[2] + 2.6) < 1e-9;
    ok = ok && r.lyapunov > 0 && std::abs(r.lyapunov - m.lyapunov) <= 0.02 * std::abs(r.lyapunov);
    return Outcome{ok, "fixed points 0, +-" + fmt(r.fixed_points[1]) + ", multipliers " + fmt(r.multipliers[0]) + ", " +
                           fmt(r.multipliers[1]) + "; exponent " + fmt(r.lyapunov) + " / " + fmt(m.lyapunov)};
  });

  report(11, "Lyapunov exponent sum on a Henon orbit", [] {
    const Params p{-1.4, -0.3};
    const OrbitStats st = henon_lyapunov(p, 1000000, 10000);
    const double lb = std::log(std::abs(p.b));
    const bool ok = std::abs(st.lyapunov_sum - lb) <= 0.05 * std::abs(lb) &&
                    std::abs(st.divergence_max - st.lyapunov_max) <= 0.1 * std::abs(st.lyapunov_max);
    return Outcome{ok, "sum " + fmt(st.lyapunov_sum) + " vs log|b| " + fmt(lb) + "; estimators " + fmt(st.lyapunov_max) +
                           " and " + fmt(st.divergence_max)};
  });

  report(12, "property suites", [] {
    const Outcome parts[] = {jet_vs_fd(), reparam_invariance(), reverification(), determinism()};
    bool ok = true;
    std::string d;
    for (const Outcome& o : parts) {
      ok = ok && o.pass;
      d += (d.empty() ? "" : "; ") + o.detail;
    }
    return Outcome{ok, d};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
