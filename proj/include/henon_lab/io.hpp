#pragma once

// JSON views of the library records, CSV writers for bulk curves, SVG export
// of manifold pictures and SHA-256 checksums for artifact bundles.
//
// Needs nlohmann/json and OpenSSL (libcrypto) on top of the core headers.
// Extended-precision values are written as decimal strings so they survive
// the trip through JSON; doubles are plain numbers.

#include <array>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

#include "henon_lab/attractor.hpp"
#include "henon_lab/continuation.hpp"
#include "henon_lab/rescale.hpp"
#include "henon_lab/resonance.hpp"

namespace henon_lab {

using Json = nlohmann::ordered_json;

template <class R>
Json num(const R& v) {
  if constexpr (std::is_same_v<R, double>) {
    return std::isfinite(v) ? Json(v) : Json(to_decimal(v));
  } else {
    return to_decimal(v);
  }
}

inline double json_double(const Json& j) { return j.is_string() ? from_decimal<double>(j.get<std::string>()) : j.get<double>(); }

template <class R>
Json point_json(const Vec2T<R>& p) {
  return Json::array({num(p.x), num(p.y)});
}

template <class R>
Json params_json(const BasicParams<R>& p) {
  return {{"a", num(p.a)}, {"b", num(p.b)}};
}

inline Json rect_json(const Rect& r) { return {{"x_lo", r.x_lo}, {"x_hi", r.x_hi}, {"y_lo", r.y_lo}, {"y_hi", r.y_hi}}; }

template <class R>
Json fixed_point_json(const BasicFixedPointData<R>& fp) {
  return {{"branch", to_string(fp.which)},      {"location", point_json(fp.location)},
          {"lambda", num(fp.lambda)},           {"sigma", num(fp.sigma)},
          {"eig_vec_s", point_json(fp.eig_vec_s)}, {"eig_vec_u", point_json(fp.eig_vec_u)},
          {"dissipative", fp.dissipative}};
}

template <class R>
Json unfolding_json(const BasicUnfoldingData<R>& u) {
  return {{"velocity_diff", point_json(u.velocity_diff)},
          {"det_a1a4_a2a3", num(u.det_a1a4_a2a3)},
          {"det_normalized", num(u.det_normalized)},
          {"fd_step", num(u.fd_step)},
          {"fd_error", num(u.fd_error)},
          {"condition_estimate", num(u.condition_estimate)},
          {"certified", u.certified}};
}

template <class R, std::size_t N>
Json array_json(const std::array<R, N>& a) {
  Json out = Json::array();
  for (const R& v : a) out.push_back(num(v));
  return out;
}

template <class R>
Json tangency_json(const BasicTangencyRecord<R>& rec, bool with_history = true) {
  Json j = {{"t_star", num(rec.t_star)},
            {"location", point_json(rec.location)},
            {"params", params_json(rec.params)},
            {"path_param", num(rec.path_param)},
            {"order", rec.order},
            {"g_derivs", array_json(rec.g_derivs)},
            {"kind", to_string(rec.kind)},
            {"saddle_pair", {{"unstable_of", to_string(rec.saddle_pair.unstable_of)},
                             {"stable_of", to_string(rec.saddle_pair.stable_of)}}},
            {"genericity", unfolding_json(rec.genericity)},
            {"scales", {{"t", num(rec.scales.t)}, {"g", num(rec.scales.g)}}},
            {"relative_residual", array_json(rec.relative_residual)},
            {"relative_g3", num(rec.relative_g3)},
            {"seed", array_json(rec.seed)},
            {"iterations", rec.iterations},
            {"leaf_depth", rec.leaf_depth},
            {"iterate_depth", rec.iterate_depth}};
  if (with_history) {
    Json h = Json::array();
    for (const NewtonStep<R>& s : rec.history)
      h.push_back({{"iteration", s.iteration}, {"t", num(s.t)}, {"params", params_json(s.params)}, {"residual", num(s.residual)}});
    j["history"] = std::move(h);
  }
  return j;
}

inline Json branch_json(const ManifoldBranch& br) {
  return {{"fixed_point", to_string(br.fp().which)},
          {"kind", to_string(br.kind())},
          {"side", to_string(br.side)},
          {"degree", br.local->degree()},
          {"iterate", br.iterate()},
          {"scale", br.local->scale},
          {"validity_residual", br.local->validity_residual},
          {"samples", br.samples.size()},
          {"arclength", br.samples.empty() ? 0.0 : br.samples.back().arclength}};
}

inline Json curve_json(const ContinuationCurve& c) {
  Json s = Json::array();
  for (const ContinuationSample& x : c.samples)
    s.push_back({{"b", x.b}, {"a", x.a}, {"t_star", x.t_star}, {"residual", x.residual}, {"velocity_a", x.velocity_a}});
  return {{"direction", c.direction}, {"samples", std::move(s)}};
}

inline Json orbit_check_json(const OrbitCheck& o) {
  return {{"forward_distance", o.forward_distance},   {"forward_steps", o.forward_steps},
          {"backward_distance", o.backward_distance}, {"backward_consistency", o.backward_consistency},
          {"backward_steps", o.backward_steps},       {"ok", o.ok}};
}

inline Json cycle_json(const CycleConfig& c) {
  Json profile = Json::array();
  for (const auto& [b, g] : c.gap_profile) profile.push_back(Json::array({b, g}));
  return {{"b0", c.b0},
          {"a0", c.a0},
          {"h_slope", c.h_slope},
          {"leaf_depth", c.leaf_depth},
          {"q_plus", tangency_json(c.q_plus)},
          {"q_minus", tangency_json(c.q_minus)},
          {"q_plus_orbit", orbit_check_json(c.q_plus_orbit)},
          {"q_minus_orbit", orbit_check_json(c.q_minus_orbit)},
          {"gap_profile", std::move(profile)}};
}

inline Json cubic_hunt_json(const CubicHuntResult& r) {
  const CubicVerification& v = r.verification;
  return {{"record", tangency_json(r.record)},
          {"power", r.power},
          {"nu_fold", r.nu_fold},
          {"k0_point", params_json(r.k0_point)},
          {"center_t", num(r.center_t)},
          {"model_offset", num(r.model_offset)},
          {"address", {{"unstable_depth", r.address.unstable_depth},
                       {"stable_depth", r.address.stable_depth},
                       {"sigma_seed", num(r.address.sigma_seed)}}},
          {"verification", {{"t", num(v.t)},
                            {"relative_residual", array_json(v.relative_residual)},
                            {"relative_g3", num(v.relative_g3)},
                            {"genericity", unfolding_json(v.genericity)},
                            {"family", {{"degree", v.family.degree},
                                        {"unstable_scale", v.family.unstable_scale},
                                        {"stable_scale", v.family.stable_scale}}},
                            {"passed", v.passed}}},
          {"log", r.log}};
}

template <class R>
Json antimonotone_json(const AntimonotoneReport<R>& rep) {
  Json lines = Json::array();
  for (const AntimonotoneLine<R>& ln : rep.lines) {
    Json ts = Json::array();
    for (const AntimonotoneTangency<R>& t : ln.tangencies)
      ts.push_back({{"s", num(t.s)}, {"t", num(t.t)}, {"params", params_json(t.params)}, {"g2_rel", num(t.g2_rel)},
                    {"velocity_rel", num(t.velocity_rel)}, {"contact", to_string(t.contact)}});
    lines.push_back({{"angle", ln.angle}, {"tangencies", std::move(ts)}, {"errors", ln.errors}, {"antimonotone", ln.antimonotone}});
  }
  return {{"radius", rep.radius}, {"n_directions", rep.n_directions}, {"antimonotone_count", rep.antimonotone_count},
          {"lines", std::move(lines)}};
}

inline Json rescale_setup_json(const RescaleSetup& s) {
  return {{"a_star", num(s.a_star)}, {"b_star", num(s.b_star)}, {"slope", num(s.slope)},
          {"depth", s.depth},        {"s_star", num(s.s_star)}, {"ws_scale", num(s.ws_scale)},
          {"wu_scale", num(s.wu_scale)}, {"zeta_lo", num(s.zeta_lo)}, {"zeta_hi", num(s.zeta_hi)},
          {"xi_q", num(s.xi_q)},     {"u_unit", num(s.u_unit)}, {"speed", num(s.speed)},
          {"sigma", num(s.sigma)},   {"lambda", num(s.lambda)}, {"degree", s.degree}};
}

inline Json rescale_report_json(const RescaleReport& r) {
  Json fits = Json::array();
  for (const RescaleFit& f : r.fits)
    fits.push_back({{"n", f.n},
                    {"sigma_n", num(f.sigma_n)},
                    {"K", num(f.K)},
                    {"b1", num(f.b1)},
                    {"cubic", num(f.c1_scaled)},
                    {"quartic_norm", num(f.quartic_norm)},
                    {"quartic_fit_rms", num(f.quartic_fit_rms)},
                    {"cubic_after_reparam", num(f.c3_reparam)},
                    {"x_center", num(f.x_center)},
                    {"x_extent", num(f.x_extent)},
                    {"mu_bar", num(f.mu_bar)},
                    {"nu_bar", num(f.nu_bar)},
                    {"samples", f.samples}});
  return {{"sigma", r.sigma},
          {"lambda", r.lambda},
          {"tau", r.tau},
          {"cubic_target", 1 / std::sqrt(r.sigma)},
          {"quartic_target", 1 / r.sigma},
          {"fits", std::move(fits)},
          {"b1_changes", r.b1_changes},
          {"cubic_ratios", r.cubic_ratios},
          {"quartic_ratios", r.quartic_ratios},
          {"center_ratios", r.center_ratios},
          {"extent_ratios", r.extent_ratios},
          {"suppression", r.suppression},
          {"k_offsets", r.k_offsets},
          {"b1_stable", r.b1_stable},
          {"cubic_decay", r.cubic_decay},
          {"quartic_decay", r.quartic_decay},
          {"reparam_suppression", r.reparam_suppression},
          {"insufficient_decay", r.insufficient_decay},
          {"diagnostics", r.diagnostics}};
}

inline Json resonance_json(const ResonanceReport& r) {
  Json hits = Json::array();
  for (const ResonanceHit& h : r.hits)
    hits.push_back({{"p", h.p}, {"q", h.q}, {"target", to_string(h.target)}, {"value", h.value}, {"distance", h.distance}});
  return {{"label", r.label},   {"lambda", r.lambda},           {"sigma", r.sigma}, {"max_order", r.max_order},
          {"tol", r.tol},       {"clean_up_to", r.clean_up_to}, {"hits", std::move(hits)}};
}

inline Json cubic_map_json(const CubicMapReport& r) {
  return {{"a", r.a},
          {"fixed_points", r.fixed_points},
          {"multipliers", r.multipliers},
          {"lyapunov", num(r.lyapunov)},
          {"orbit_escaped", r.orbit_escaped},
          {"in_window", r.in_window},
          {"window", {kCubicWindowLo, kCubicWindowHi}},
          {"n_iter", r.n_iter},
          {"transient", r.transient},
          {"x0", r.x0}};
}

inline Json orbit_stats_json(const OrbitStats& s) {
  return {{"params", params_json(s.params)},
          {"lyapunov_max", num(s.lyapunov_max)},
          {"lyapunov_min", num(s.lyapunov_min)},
          {"lyapunov_sum", num(s.lyapunov_sum)},
          {"log_abs_b", num(std::log(std::abs(s.params.b)) * s.map_power)},
          {"divergence_max", num(s.divergence_max)},
          {"growth_constant_c", num(s.growth_constant_c)},
          {"growth_fit_rate", num(s.growth_fit_rate)},
          {"bbox", rect_json(s.bbox)},
          {"n_iter", s.n_iter},
          {"transient", s.transient},
          {"map_power", s.map_power},
          {"seed", point_json(s.seed)},
          {"escaped", s.escaped}};
}

inline Json return_map_json(const ReturnMapData& r) {
  Json bins = Json::array();
  for (const ReturnMapBin& b : r.bins) bins.push_back({{"center", b.center}, {"mean", b.mean}, {"count", b.count}});
  return {{"params", params_json(r.params)},
          {"m", r.m},
          {"axis", to_string(r.axis)},
          {"n_iter", r.n_iter},
          {"transient", r.transient},
          {"samples", r.u.size()},
          {"cubic_fit", r.cubic},
          {"cubic_rms", r.cubic_rms},
          {"bins", std::move(bins)}};
}

// ------------------------------------------------------------------ csv ---

inline void write_curve_csv(std::ostream& os, const ContinuationCurve& c) {
  os << "b,a,t_star,residual,velocity_a\n" << std::setprecision(17);
  for (const ContinuationSample& s : c.samples)
    os << s.b << ',' << s.a << ',' << s.t_star << ',' << s.residual << ',' << s.velocity_a << '\n';
}

/// One row per sample of one rescaled curve: u_bar, y and the residual of the cubic fit.
inline void write_rescale_csv(std::ostream& os, const RescaledCurve& c) {
  os << "u_bar,x,y,residual\n";
  const MonomialFit<Real> fit = fit_monomials(c.u_bar, c.y, {0, 2, 3});
  for (std::size_t i = 0; i < c.u_bar.size(); ++i)
    os << to_decimal(to_double(c.u_bar[i])) << ',' << to_decimal(to_double(c.x[i])) << ','
       << to_decimal(to_double(c.y[i])) << ',' << to_decimal(to_double(fit.residuals[i])) << '\n';
}

inline void write_return_map_csv(std::ostream& os, const ReturnMapData& r) {
  os << "u,v\n" << std::setprecision(17);
  for (std::size_t i = 0; i < r.u.size(); ++i) os << r.u[i] << ',' << r.v[i] << '\n';
}

/// Orbit dump (k, x, y) for k = 0 .. count - 1 from q.
inline void write_orbit_csv(std::ostream& os, const Params& p, Point2 q, long count) {
  os << "k,x,y\n" << std::setprecision(17);
  for (long k = 0; k < count; ++k) {
    os << k << ',' << q.x << ',' << q.y << '\n';
    q = apply(p, q);
  }
}

// ------------------------------------------------------------------ svg ---

struct SvgMarker {
  Point2 point;
  std::string label;
};

inline std::string svg_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

/// Stable branches in class "stable", unstable in "unstable", tangencies as
/// circle markers. The viewport rectangle maps onto a width x height canvas
/// with y pointing up; polylines break where they leave the viewport.
inline std::string export_svg(const std::vector<ManifoldBranch>& branches, const std::vector<SvgMarker>& tangencies,
                              const Rect& viewport, int width = 800, int height = 800) {
  if (viewport.empty()) fail(ErrorKind::invalid_input, "viewport must be non-empty");
  const double sx = width / (viewport.x_hi - viewport.x_lo), sy = height / (viewport.y_hi - viewport.y_lo);
  auto X = [&](double x) { return (x - viewport.x_lo) * sx; };
  auto Y = [&](double y) { return (viewport.y_hi - y) * sy; };
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
     << "<style>.axis{stroke:#999;stroke-width:1}.stable{fill:none;stroke:#1f5fbf;stroke-width:1.5}"
        ".unstable{fill:none;stroke:#c0392b;stroke-width:1.5}.tangency{fill:#2a2;stroke:#000;stroke-width:0.5}</style>\n"
     << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  if (viewport.y_lo <= 0 && viewport.y_hi >= 0)
    os << "<line class=\"axis\" x1=\"0\" y1=\"" << svg_number(Y(0)) << "\" x2=\"" << width << "\" y2=\""
       << svg_number(Y(0)) << "\"/>\n";
  if (viewport.x_lo <= 0 && viewport.x_hi >= 0)
    os << "<line class=\"axis\" x1=\"" << svg_number(X(0)) << "\" y1=\"0\" x2=\"" << svg_number(X(0)) << "\" y2=\""
       << height << "\"/>\n";
  for (const ManifoldBranch& br : branches) {
    const char* cls = br.kind() == ManifoldKind::stable ? "stable" : "unstable";
    os << "<polyline class=\"" << cls << "\" points=\"";
    bool first = true;
    for (const BranchSample& s : br.samples) {
      if (!viewport.contains(s.point)) continue;
      os << (first ? "" : " ") << svg_number(X(s.point.x)) << ',' << svg_number(Y(s.point.y));
      first = false;
    }
    os << "\"/>\n";
  }
  for (const SvgMarker& m : tangencies) {
    os << "<circle class=\"tangency\" cx=\"" << svg_number(X(m.point.x)) << "\" cy=\"" << svg_number(Y(m.point.y))
       << "\" r=\"4\">";
    if (!m.label.empty()) os << "<title>" << m.label << "</title>";
    os << "</circle>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline std::string export_svg(const std::vector<ManifoldBranch>& branches, const std::vector<TangencyRecord>& tangencies,
                              const Rect& viewport) {
  std::vector<SvgMarker> marks;
  for (const TangencyRecord& t : tangencies) marks.push_back({t.location, to_string(t.kind)});
  return export_svg(branches, marks, viewport);
}

// --------------------------------------------------------------- digest ---

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::invalid_input, "SHA-256 digest failed");
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
  return os.str();
}

}  // namespace henon_lab
