// anosovlab: splitting, manifold, and regularity experiments for perturbed
// hyperbolic torus automorphisms. One seeded generator drives every random
// choice, so identical configs produce identical bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "anosovlab/manifolds.hpp"
#include "anosovlab/map_spec.hpp"
#include "anosovlab/regularity.hpp"
#include "anosovlab/rng.hpp"
#include "anosovlab/splitting2.hpp"
#include "anosovlab/splitting_nd.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace anosovlab;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConstructionError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConstructionError(std::string("config parse error: ") + e.what());
  }
  return j;
}

MapSpec spec_from_config(const json& cfg) {
  if (!cfg.contains("map"))
    throw ConstructionError("config is missing the \"map\" object");
  return map_spec_from_json(cfg.at("map"));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_field_csv(const fs::path& path, const SlopeField& field) {
  std::ostringstream os;
  os << "i,j,u1,u2\n";
  for (int i = 0; i < field.resolution; ++i)
    for (int j = 0; j < field.resolution; ++j)
      os << i << "," << j << "," << csv_num(field.at(i, j).u1) << ","
         << csv_num(field.at(i, j).u2) << "\n";
  write_text(path, os.str());
}

// config section value unless the flag was given on the command line
template <typename T>
void maybe_config(const json& cfg, const char* section, const char* key,
                  const CLI::Option* opt, T& var) {
  if (opt && opt->count() > 0) return;
  if (cfg.contains(section) && cfg.at(section).contains(key))
    var = cfg.at(section).at(key).get<T>();
}

TorusPoint point_from_json(const json& arr) {
  Vec v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr.at(i).get<double>();
  return TorusPoint(std::move(v));
}

int run_splitting(const GlobalArgs& g, const json& cfg, int depth, int resolution,
                  int rates_samples, int rates_horizon, int defect_samples) {
  MapSpec spec = spec_from_config(cfg);
  SplittingOptions opts;
  opts.depth = depth;

  SlopeField eu(resolution), es(resolution);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      TorusPoint x = eu.node(i, j);
      eu.at(i, j) = unstable_direction(spec, x, depth);
      es.at(i, j) = stable_direction(spec, x, depth);
    }
  }
  write_field_csv(fs::path(g.out_dir) / "eu_field.csv", eu);
  write_field_csv(fs::path(g.out_dir) / "es_field.csv", es);

  HyperbolicityEstimate rates = finite_time_rates(
      spec, low_discrepancy_points(spec.dim(), rates_samples), rates_horizon, opts);
  write_json(fs::path(g.out_dir) / "hyperbolicity.json", to_json(rates));

  auto field_at = [&](const TorusPoint& p) {
    return unstable_direction(spec, p, depth);
  };
  double max_defect = 0, sum_defect = 0;
  auto pts = low_discrepancy_points(spec.dim(), defect_samples);
  for (const TorusPoint& p : pts) {
    double d = invariance_defect(spec, p, field_at);
    max_defect = std::max(max_defect, d);
    sum_defect += d;
  }
  write_json(fs::path(g.out_dir) / "invariance.json",
             {{"max_defect", max_defect},
              {"mean_defect", sum_defect / defect_samples},
              {"samples", defect_samples},
              {"depth", depth}});
  return 0;
}

int run_figure(const GlobalArgs& g, const json& cfg, int grid, double half_length,
               double step, int depth) {
  MapSpec spec = spec_from_config(cfg);
  std::vector<TorusPoint> bases;
  if (cfg.contains("figure") && cfg.at("figure").contains("bases")) {
    for (const auto& b : cfg.at("figure").at("bases"))
      bases.push_back(point_from_json(b));
  } else {
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j)
        bases.emplace_back((i + 0.5) / grid, (j + 0.5) / grid);
  }
  if (bases.empty()) throw ConstructionError("figure: empty base list");

  auto entries = figure_field(spec, bases, half_length, step, depth);
  std::ostringstream svg, csv;
  write_figure_svg(svg, entries);
  write_figure_csv(csv, entries);
  write_text(fs::path(g.out_dir) / "figure.svg", svg.str());
  write_text(fs::path(g.out_dir) / "figure.csv", csv.str());

  bool any_ok = false;
  for (const auto& e : entries) any_ok = any_ok || e.ok;
  return any_ok ? 0 : 4;
}

int run_holder(const GlobalArgs& g, const json& cfg, double t_min, double t_max,
               double ratio, double floor, int depth, int rates_horizon) {
  MapSpec spec = spec_from_config(cfg);
  SplittingOptions opts;
  opts.depth = depth;

  json out;
  std::vector<HolderSample> samples;
  if (cfg.contains("holder") && cfg.at("holder").contains("synthetic")) {
    // planted power law routed through the same fitting path
    const auto& syn = cfg.at("holder").at("synthetic");
    double constant = syn.value("constant", 0.3);
    double exponent = syn.value("exponent", 0.7);
    double noise = syn.value("noise", 0.0);
    auto rng = make_rng(g.seed, 0);
    for (double t : default_scale_ladder(t_min, t_max, ratio)) {
      double dev = constant * std::pow(std::abs(t), exponent);
      if (noise > 0) dev *= 1.0 + noise * (2 * uniform01(rng) - 1);
      samples.push_back({t, dev});
    }
    out["mode"] = "synthetic";
  } else {
    TorusPoint base(0.0, 0.0);
    if (cfg.contains("holder") && cfg.at("holder").contains("base")) {
      base = point_from_json(cfg.at("holder").at("base"));
    } else {
      auto rng = make_rng(g.seed, 0);
      base = TorusPoint(uniform01(rng), uniform01(rng));
    }
    out["base"] = {base[0], base[1]};
    samples = stable_transversal_samples(
        spec, base, default_scale_ladder(t_min, t_max, ratio), opts);
  }

  std::ostringstream csv;
  csv << "t,deviation\n";
  for (const auto& s : samples)
    csv << csv_num(s.t) << "," << csv_num(s.deviation) << "\n";
  write_text(fs::path(g.out_dir) / "holder_samples.csv", csv.str());

  HyperbolicityEstimate rates = finite_time_rates(
      spec, low_discrepancy_points(spec.dim(), 256), rates_horizon, opts);
  out["alpha_max"] = rates.alpha_max;

  try {
    HolderReport report = fit_holder(samples, floor);
    out["status"] = "ok";
    out["report"] = to_json(report);
  } catch (const DegenerateFit& e) {
    out["status"] = "degenerate";
    out["detail"] = e.what();
  }
  write_json(fs::path(g.out_dir) / "holder.json", out);
  return 0;
}

int run_differentiability(const GlobalArgs& g, const json& cfg, double h_min,
                          double h_max, double ratio, int depth, bool derivative,
                          double fd_step) {
  MapSpec spec = spec_from_config(cfg);
  SplittingOptions opts;
  opts.depth = depth;
  TorusPoint base(0.0, 0.0);
  if (cfg.contains("differentiability") && cfg.at("differentiability").contains("base"))
    base = point_from_json(cfg.at("differentiability").at("base"));

  std::vector<std::pair<double, double>> ladder;
  for (double h = h_max; h >= h_min * (1 - 1e-12); h /= ratio)
    ladder.emplace_back(h, h);

  json out;
  out["base"] = {base[0], base[1]};
  DiffReport report = differentiability_profile(spec, base, ladder, opts);
  out["profile"] = to_json(report);

  if (derivative) {
    std::vector<double> scales;
    for (double t = std::max(10 * fd_step, h_min); t <= h_max; t *= ratio) {
      scales.push_back(t);
      scales.push_back(-t);
    }
    try {
      HolderReport dh = derivative_holder_profile(spec, base, scales, fd_step, opts);
      out["derivative_holder"] = to_json(dh);
      out["derivative_holder"]["status"] = "ok";
    } catch (const DegenerateFit& e) {
      out["derivative_holder"] = {{"status", "degenerate"}, {"detail", e.what()}};
    }
  }
  write_json(fs::path(g.out_dir) / "differentiability.json", out);
  return 0;
}

int run_cone(const GlobalArgs& g, const json& cfg, ConeParams params, int big_n,
             int rounds, int trials, int resolution, int depth) {
  MapSpec spec = spec_from_config(cfg);
  SplittingOptions opts;
  opts.depth = depth;
  ConeReport report = cone_nesting_check(spec, params, big_n, rounds, trials,
                                         g.seed, resolution, opts);
  write_json(fs::path(g.out_dir) / "cone.json", to_json(report));
  return 0;
}

int run_nd(const GlobalArgs& g, const json& cfg, int depth, int d_u, double t,
           int n_max) {
  MapSpec spec = spec_from_config(cfg);
  SplittingOptions opts;
  opts.depth = depth;
  TorusPoint base{Vec(Vec::Zero(spec.dim()))};
  if (cfg.contains("nd") && cfg.at("nd").contains("base"))
    base = point_from_json(cfg.at("nd").at("base"));

  ReferenceSplitting ref = reference_splitting(spec.linear());
  int want_du = d_u > 0 ? d_u : ref.d_u;
  GraphMap gm = unstable_graph(spec, base, depth, want_du, opts);
  json out = to_json(gm);
  out["base"] = json::array();
  for (int i = 0; i < base.dim(); ++i) out["base"].push_back(base[i]);
  write_json(fs::path(g.out_dir) / "graphmap.json", out);

  if (t != 0) {
    BlockGrowthReport bg = block_growth_check(spec, base, t, n_max, opts);
    write_json(fs::path(g.out_dir) / "block_growth.json", to_json(bg));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for hyperbolic splittings on tori"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "run configuration (JSON)")->required();
  app.add_option("--seed", g.seed, "master seed for all randomized choices");
  app.add_option("--out", g.out_dir, "output directory");

  // splitting
  auto* sp = app.add_subcommand("splitting", "compute E_u/E_s fields and rates");
  int sp_depth = 60, sp_res = 128, sp_rsamples = 256, sp_rhorizon = 40,
      sp_dsamples = 1000;
  auto* o_sp_depth = sp->add_option("--depth", sp_depth, "iteration depth");
  auto* o_sp_res = sp->add_option("--resolution", sp_res, "field grid N");
  auto* o_sp_rs = sp->add_option("--rates-samples", sp_rsamples, "rate sample count");
  auto* o_sp_rh = sp->add_option("--rates-horizon", sp_rhorizon, "rate horizon n");
  auto* o_sp_ds = sp->add_option("--defect-samples", sp_dsamples,
                                 "invariance defect sample count");

  // figure
  auto* fig = app.add_subcommand("figure", "foliation picture (SVG + CSV)");
  int fig_grid = 3, fig_depth = 18;
  double fig_half = 0.2, fig_step = 0.01;
  auto* o_fig_grid = fig->add_option("--grid", fig_grid, "k x k base grid");
  auto* o_fig_half = fig->add_option("--half-length", fig_half, "arclength per side");
  auto* o_fig_step = fig->add_option("--step", fig_step, "polyline step");
  auto* o_fig_depth = fig->add_option("--depth", fig_depth, "growth iterations");

  // holder
  auto* hold = app.add_subcommand("holder", "Holder profile along W_s");
  double h_tmin = 1e-4, h_tmax = 1e-1, h_ratio = 1.4142135623730951,
         h_floor = 1e-12;
  int h_depth = 60, h_rhorizon = 40;
  auto* o_h_tmin = hold->add_option("--t-min", h_tmin, "smallest |t|");
  auto* o_h_tmax = hold->add_option("--t-max", h_tmax, "largest |t|");
  auto* o_h_ratio = hold->add_option("--ratio", h_ratio, "ladder ratio");
  auto* o_h_floor = hold->add_option("--floor", h_floor, "noise floor");
  auto* o_h_depth = hold->add_option("--depth", h_depth, "iteration depth");
  auto* o_h_rh = hold->add_option("--rates-horizon", h_rhorizon, "rate horizon n");

  // differentiability
  auto* diff = app.add_subcommand("differentiability",
                                  "second-difference profile along W_s");
  double d_hmin = 1e-3, d_hmax = 5e-2, d_ratio = 1.4142135623730951,
         d_fd = 1e-4;
  int d_depth = 60;
  bool d_deriv = false;
  auto* o_d_hmin = diff->add_option("--h-min", d_hmin, "smallest offset");
  auto* o_d_hmax = diff->add_option("--h-max", d_hmax, "largest offset");
  auto* o_d_ratio = diff->add_option("--ratio", d_ratio, "ladder ratio");
  auto* o_d_depth = diff->add_option("--depth", d_depth, "iteration depth");
  auto* o_d_fd = diff->add_option("--fd-step", d_fd, "finite-difference step");
  diff->add_flag("--derivative", d_deriv, "also fit the derivative profile");

  // cone
  auto* cone = app.add_subcommand("cone", "cone nesting experiment");
  ConeParams cp;
  cp.delta = 0.2;
  cp.eps0 = 0.01;
  cp.eps1 = 0.1;
  cp.alpha = 1.0;
  cp.eps = 0.05;
  cp.constant_k = 0;
  int c_bign = 3, c_rounds = 5, c_trials = 20, c_res = 128, c_depth = 60;
  auto* o_c_delta = cone->add_option("--delta", cp.delta, "field closeness");
  auto* o_c_eps0 = cone->add_option("--eps0", cp.eps0, "annulus inner radius");
  auto* o_c_eps1 = cone->add_option("--eps1", cp.eps1, "annulus outer radius");
  auto* o_c_alpha = cone->add_option("--alpha", cp.alpha, "bunching exponent");
  auto* o_c_eps = cone->add_option("--eps", cp.eps, "exponent slack");
  auto* o_c_k = cone->add_option("--k", cp.constant_k, "cone constant (0 = measure)");
  auto* o_c_bign = cone->add_option("--big-n", c_bign, "steps per round");
  auto* o_c_rounds = cone->add_option("--rounds", c_rounds, "rounds");
  auto* o_c_trials = cone->add_option("--trials", c_trials, "random fields");
  auto* o_c_res = cone->add_option("--resolution", c_res, "field grid N");
  auto* o_c_depth = cone->add_option("--depth", c_depth, "iteration depth");

  // nd-splitting
  auto* nd = app.add_subcommand("nd-splitting", "graph-transform splitting");
  int nd_depth = 60, nd_du = 0, nd_nmax = 20;
  double nd_t = 0;
  auto* o_nd_depth = nd->add_option("--depth", nd_depth, "iteration depth");
  auto* o_nd_du = nd->add_option("--d-u", nd_du, "unstable dimension (0 = auto)");
  auto* o_nd_t = nd->add_option("--t", nd_t, "stable transversal offset (2d only)");
  auto* o_nd_nmax = nd->add_option("--n-max", nd_nmax, "block growth horizon");

  CLI11_PARSE(app, argc, argv);

  try {
    json cfg = load_config(g.config_path);
    fs::create_directories(g.out_dir);

    if (sp->parsed()) {
      maybe_config(cfg, "splitting", "depth", o_sp_depth, sp_depth);
      maybe_config(cfg, "splitting", "resolution", o_sp_res, sp_res);
      maybe_config(cfg, "splitting", "rates_samples", o_sp_rs, sp_rsamples);
      maybe_config(cfg, "splitting", "rates_horizon", o_sp_rh, sp_rhorizon);
      maybe_config(cfg, "splitting", "defect_samples", o_sp_ds, sp_dsamples);
      return run_splitting(g, cfg, sp_depth, sp_res, sp_rsamples, sp_rhorizon,
                           sp_dsamples);
    }
    if (fig->parsed()) {
      maybe_config(cfg, "figure", "grid", o_fig_grid, fig_grid);
      maybe_config(cfg, "figure", "half_length", o_fig_half, fig_half);
      maybe_config(cfg, "figure", "step", o_fig_step, fig_step);
      maybe_config(cfg, "figure", "depth", o_fig_depth, fig_depth);
      return run_figure(g, cfg, fig_grid, fig_half, fig_step, fig_depth);
    }
    if (hold->parsed()) {
      maybe_config(cfg, "holder", "t_min", o_h_tmin, h_tmin);
      maybe_config(cfg, "holder", "t_max", o_h_tmax, h_tmax);
      maybe_config(cfg, "holder", "ratio", o_h_ratio, h_ratio);
      maybe_config(cfg, "holder", "floor", o_h_floor, h_floor);
      maybe_config(cfg, "holder", "depth", o_h_depth, h_depth);
      maybe_config(cfg, "holder", "rates_horizon", o_h_rh, h_rhorizon);
      return run_holder(g, cfg, h_tmin, h_tmax, h_ratio, h_floor, h_depth,
                        h_rhorizon);
    }
    if (diff->parsed()) {
      maybe_config(cfg, "differentiability", "h_min", o_d_hmin, d_hmin);
      maybe_config(cfg, "differentiability", "h_max", o_d_hmax, d_hmax);
      maybe_config(cfg, "differentiability", "ratio", o_d_ratio, d_ratio);
      maybe_config(cfg, "differentiability", "depth", o_d_depth, d_depth);
      maybe_config(cfg, "differentiability", "fd_step", o_d_fd, d_fd);
      if (cfg.contains("differentiability") &&
          cfg.at("differentiability").value("derivative", false))
        d_deriv = true;
      return run_differentiability(g, cfg, d_hmin, d_hmax, d_ratio, d_depth,
                                   d_deriv, d_fd);
    }
    if (cone->parsed()) {
      maybe_config(cfg, "cone", "delta", o_c_delta, cp.delta);
      maybe_config(cfg, "cone", "eps0", o_c_eps0, cp.eps0);
      maybe_config(cfg, "cone", "eps1", o_c_eps1, cp.eps1);
      maybe_config(cfg, "cone", "alpha", o_c_alpha, cp.alpha);
      maybe_config(cfg, "cone", "eps", o_c_eps, cp.eps);
      maybe_config(cfg, "cone", "k", o_c_k, cp.constant_k);
      maybe_config(cfg, "cone", "big_n", o_c_bign, c_bign);
      maybe_config(cfg, "cone", "rounds", o_c_rounds, c_rounds);
      maybe_config(cfg, "cone", "trials", o_c_trials, c_trials);
      maybe_config(cfg, "cone", "resolution", o_c_res, c_res);
      maybe_config(cfg, "cone", "depth", o_c_depth, c_depth);
      return run_cone(g, cfg, cp, c_bign, c_rounds, c_trials, c_res, c_depth);
    }
    if (nd->parsed()) {
      maybe_config(cfg, "nd", "depth", o_nd_depth, nd_depth);
      maybe_config(cfg, "nd", "d_u", o_nd_du, nd_du);
      maybe_config(cfg, "nd", "t", o_nd_t, nd_t);
      maybe_config(cfg, "nd", "n_max", o_nd_nmax, nd_nmax);
      return run_nd(g, cfg, nd_depth, nd_du, nd_t, nd_nmax);
    }
    return 1;
  } catch (const ConstructionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NotHyperbolic& e) {
    std::cerr << "hyperbolicity failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
