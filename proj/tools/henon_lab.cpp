#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "henon_lab/commands.hpp"

using namespace henon_lab;

namespace {

template <class T>
void set_if(const std::optional<T>& v, T& dst) {
  if (v) dst = *v;
}

struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> a, b;
  std::optional<double> arclength;
  std::optional<int> degree;
  std::optional<std::string> fixed_point, kind;
  std::optional<double> tb, t0, a0;
  std::optional<double> b_start, b_end, step;
  std::optional<int> max_leaf;
  std::optional<int> power;
  std::optional<double> trust_radius;
  std::optional<int> directions;
  std::optional<double> mu_bar, nu_bar;
  std::optional<int> n_first, count;
  std::optional<int> max_order;
  std::optional<double> tol;
  std::optional<double> cubic_a, x0;
  std::optional<long> n_iter, transient;
  std::optional<int> map_power, m, bins;
  std::optional<std::string> axis;

  void apply(RunConfig& c, const std::string& command) const {
    set_if(out, c.out);
    set_if(seed, c.seed);
    set_if(threads, c.threads);
    if (a || b) {
      if (!c.params && (!a || !b)) fail(ErrorKind::invalid_config, "--a and --b must be given together");
      ParamsConfig p = c.params.value_or(ParamsConfig{});
      set_if(a, p.a);
      set_if(b, p.b);
      c.params = p;
    }
    set_if(cubic_a, c.cubic_map.a);
    set_if(arclength, c.manifold.arclength);
    set_if(degree, c.manifold.degree);
    set_if(fixed_point, c.manifold.fixed_point);
    set_if(kind, c.manifold.kind);
    set_if(tb, c.tangency.b);
    set_if(t0, c.tangency.t0);
    if (a0) c.tangency.a0 = *a0;
    set_if(b_start, c.continuation.b_start);
    set_if(b_end, c.continuation.b_end);
    set_if(step, c.continuation.step);
    set_if(max_leaf, c.cycle.max_leaf);
    set_if(power, c.cubic.power);
    set_if(trust_radius, c.cubic.trust_radius);
    set_if(directions, c.cubic.antimonotone_directions);
    set_if(mu_bar, c.rescale.mu_bar);
    set_if(nu_bar, c.rescale.nu_bar);
    set_if(n_first, c.rescale.n_first);
    set_if(count, c.rescale.count);
    set_if(max_order, c.resonance.max_order);
    set_if(tol, c.resonance.tol);
    set_if(x0, c.cubic_map.x0);
    if (command == "cubic-map") {
      set_if(n_iter, c.cubic_map.n_iter);
      set_if(transient, c.cubic_map.transient);
    } else if (command == "lyapunov") {
      set_if(n_iter, c.lyapunov.n_iter);
      set_if(transient, c.lyapunov.transient);
    } else if (command == "return-map") {
      set_if(n_iter, c.return_map.n_iter);
      set_if(transient, c.return_map.transient);
    }
    set_if(map_power, c.lyapunov.map_power);
    set_if(m, c.return_map.m);
    set_if(bins, c.return_map.bins);
    set_if(axis, c.return_map.axis);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant manifolds, tangencies and rescaling near (a, b) = (-2, 0) for phi(x, y) = (y, a - b x + y^2)"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  Overrides o;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--threads", o.threads, "worker threads for independent sub-tasks");

  auto params = [&](CLI::App* s) {
    s->add_option("--a", o.a, "parameter a");
    s->add_option("--b", o.b, "parameter b");
  };
  auto continuation = [&](CLI::App* s) {
    s->add_option("--b-start", o.b_start, "first b of the h(b) continuation");
    s->add_option("--b-end", o.b_end, "last b of the h(b) continuation");
    s->add_option("--step", o.step, "initial continuation step in b");
  };
  auto orbit = [&](CLI::App* s) {
    s->add_option("--n-iter", o.n_iter, "iterations after the transient");
    s->add_option("--transient", o.transient, "discarded iterations");
  };

  auto* fp = app.add_subcommand("fixed-points", "saddle fixed points, eigen-data and conjugacy check");
  params(fp);
  for (const char* name : {"manifold", "render"}) {
    auto* s = app.add_subcommand(name, std::string(name) == "render" ? "SVG picture of the invariant manifolds"
                                                                     : "grow stable and unstable manifold branches");
    params(s);
    s->add_option("--arclength", o.arclength, "arclength cap per branch");
    s->add_option("--degree", o.degree, "local parametrization degree");
    s->add_option("--fixed-point", o.fixed_point, "plus, minus or both");
    s->add_option("--kind", o.kind, "stable, unstable or both");
  }
  auto* tq = app.add_subcommand("tangency-quad", "quadratic heteroclinic tangency q+ at fixed b");
  tq->add_option("--b", o.tb, "parameter b");
  tq->add_option("--a0", o.a0, "initial a");
  tq->add_option("--t0", o.t0, "initial curve parameter");
  app.add_subcommand("tangency-cubic", "refine a cubic homoclinic tangency from cubic.seed");
  continuation(app.add_subcommand("continue-h", "continue the tangency curve a = h(b)"));
  auto* cf = app.add_subcommand("cycle-find", "heteroclinic cycle (b0, a0) on the tangency curve");
  continuation(cf);
  cf->add_option("--max-leaf", o.max_leaf, "deepest stable leaf tried");
  auto* ch = app.add_subcommand("cubic-hunt", "cubic homoclinic tangency near the cycle, with certificate");
  continuation(ch);
  ch->add_option("--power", o.power, "iterate power of the folded arc (0 = automatic)");
  ch->add_option("--trust-radius", o.trust_radius, "allowed distance from (a0, b0)");
  ch->add_option("--directions", o.directions, "antimonotone scan directions (0 skips the scan)");
  auto* rv = app.add_subcommand("rescale-verify", "rescaled return curves and their decay rates");
  continuation(rv);
  rv->add_option("--mu-bar", o.mu_bar, "rescaled mu");
  rv->add_option("--nu-bar", o.nu_bar, "rescaled nu");
  rv->add_option("--n-first", o.n_first, "first iterate count");
  rv->add_option("--count", o.count, "number of consecutive iterate counts");
  auto* rs = app.add_subcommand("resonance-scan", "eigenvalue resonance diagnostics (default: at the cycle)");
  params(rs);
  rs->add_option("--max-order", o.max_order, "largest p + q");
  rs->add_option("--tol", o.tol, "hit tolerance");
  auto* cm = app.add_subcommand("cubic-map", "the model map x -> -x^3 + a x");
  cm->add_option("--a", o.cubic_a, "parameter a");
  cm->add_option("--x0", o.x0, "initial point");
  orbit(cm);
  auto* ly = app.add_subcommand("lyapunov", "Lyapunov exponents along an attractor orbit");
  params(ly);
  orbit(ly);
  ly->add_option("--map-power", o.map_power, "exponents per application of phi^power");
  auto* rm = app.add_subcommand("return-map", "sampled relation (x_k, x_{k+m}) on the attractor");
  params(rm);
  orbit(rm);
  rm->add_option("--m", o.m, "return power");
  rm->add_option("--axis", o.axis, "x, y or dominant");
  rm->add_option("--bins", o.bins, "number of bins");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (!cfg.command.empty() && cfg.command != command)
      std::cerr << "note: configuration names '" << cfg.command << "', running '" << command << "'\n";
    cfg.command = command;
    o.apply(cfg, command);
    validate(cfg);
    const ArtifactBundle bundle = execute_command(cfg);
    write_bundle(bundle, cfg.out);
    for (const std::string& line : bundle.log) std::cout << line << '\n';
    std::cout << "run " << bundle.run_id << ": " << bundle.files.size() << " files in " << cfg.out << '\n';
    return bundle.exit_code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::invalid_config ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
