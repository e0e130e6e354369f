#include "anosovlab/regularity.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>

#include <nlohmann/json.hpp>

#include "anosovlab/rng.hpp"

namespace anosovlab {

namespace {

struct OlsFit {
  double slope = 0, intercept = 0, r_squared = 1, max_abs_residual = 0;
};

OlsFit ols(const std::vector<double>& xs, const std::vector<double>& ys,
           std::size_t lo, std::size_t hi) {  // [lo, hi)
  double n = static_cast<double>(hi - lo);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  OlsFit fit;
  fit.slope = denom != 0 ? (n * sxy - sx * sy) / denom : 0.0;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0, ss_tot = 0, mean_y = sy / n;
  for (std::size_t i = lo; i < hi; ++i) {
    double res = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += res * res;
    ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
    fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(res));
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace

std::vector<double> default_scale_ladder(double t_min, double t_max, double ratio) {
  if (!(t_min > 0) || !(t_max > t_min) || !(ratio > 1))
    throw DomainError("default_scale_ladder: need 0 < t_min < t_max, ratio > 1");
  std::vector<double> scales;
  for (double t = t_min; t <= t_max * (1 + 1e-12); t *= ratio) {
    scales.push_back(t);
    scales.push_back(-t);
  }
  return scales;
}

std::vector<HolderSample> stable_transversal_samples(const MapSpec& spec,
                                                     const TorusPoint& x,
                                                     const std::vector<double>& scales,
                                                     const SplittingOptions& opts) {
  if (scales.empty()) throw DomainError("stable_transversal_samples: no scales");
  double max_abs = 0, min_abs = 1e300;
  for (double t : scales) {
    max_abs = std::max(max_abs, std::abs(t));
    min_abs = std::min(min_abs, std::abs(t));
  }
  if (max_abs > 0.5)
    throw DomainError("stable_transversal_samples: scales exceed the local ball");

  double half = std::min(0.5, max_abs * 1.05 + 1e-4);
  double step = std::max(std::max(min_abs, 1e-6) / 4, half / 4096);
  Polyline ws = grow_manifold(spec, {x, ManifoldKind::stable, half, step, 18}, opts);
  Direction2 eu_base = unstable_direction(spec, x, opts.depth);

  std::vector<HolderSample> samples;
  samples.reserve(scales.size());
  for (double t : scales) {
    TorusPoint y = point_at_arclength(ws, t);
    Direction2 eu = unstable_direction(spec, y, opts.depth);
    samples.push_back({t, angle_between(eu, eu_base)});
  }
  return samples;
}

HolderReport fit_holder(const std::vector<HolderSample>& samples, double floor) {
  std::vector<HolderSample> admitted;
  for (const auto& s : samples)
    if (s.deviation > floor && std::abs(s.t) > 0) admitted.push_back(s);
  if (admitted.size() < 6)
    throw DegenerateFit(
        "degenerate: distribution indistinguishable from constant at this "
        "precision");

  std::sort(admitted.begin(), admitted.end(),
            [](const HolderSample& a, const HolderSample& b) {
              return std::abs(a.t) < std::abs(b.t);
            });
  std::vector<double> lx(admitted.size()), ly(admitted.size());
  for (std::size_t i = 0; i < admitted.size(); ++i) {
    lx[i] = std::log(std::abs(admitted[i].t));
    ly[i] = std::log(admitted[i].deviation);
  }

  // widest contiguous window (in decades of |t|) whose residuals stay below
  // 10% of the window's log-deviation range; fall back to everything
  const std::size_t m = admitted.size();
  std::size_t best_lo = 0, best_hi = m;
  double best_width = -1;
  bool found = false;
  for (std::size_t lo = 0; lo < m; ++lo) {
    for (std::size_t hi = lo + 6; hi <= m; ++hi) {
      OlsFit fit = ols(lx, ly, lo, hi);
      double y_min = *std::min_element(ly.begin() + lo, ly.begin() + hi);
      double y_max = *std::max_element(ly.begin() + lo, ly.begin() + hi);
      double range = y_max - y_min;
      if (fit.max_abs_residual > 0.1 * range) continue;
      double width = lx[hi - 1] - lx[lo];
      if (width > best_width) {
        best_width = width;
        best_lo = lo;
        best_hi = hi;
        found = true;
      }
    }
  }
  if (!found) {
    best_lo = 0;
    best_hi = m;
  }

  OlsFit fit = ols(lx, ly, best_lo, best_hi);
  HolderReport report;
  report.exponent = fit.slope;
  report.constant = std::exp(fit.intercept);
  report.fit_range = {std::abs(admitted[best_lo].t), std::abs(admitted[best_hi - 1].t)};
  report.r_squared = fit.r_squared;
  report.n_samples = static_cast<int>(best_hi - best_lo);
  return report;
}

double second_difference(double f_plus, double f_base, double f_minus, double h1,
                         double h2) {
  if (!(h1 > 0) || !(h2 > 0))
    throw DomainError("second_difference: offsets must be positive");
  return std::abs(h2 * f_plus + h1 * f_minus - (h1 + h2) * f_base) / (h1 * h2);
}

std::function<double(double)> stable_slope_function(const MapSpec& spec,
                                                    const TorusPoint& x,
                                                    double max_abs_t,
                                                    const SplittingOptions& opts) {
  if (!(max_abs_t > 0) || max_abs_t > 0.5)
    throw DomainError("stable_slope_function: need 0 < max_abs_t <= 0.5");
  double half = std::min(0.5, max_abs_t * 1.05 + 1e-4);
  double step = std::max(max_abs_t / 2048, 1e-6);
  auto ws = std::make_shared<Polyline>(
      grow_manifold(spec, {x, ManifoldKind::stable, half, step, 18}, opts));
  Eigen::Matrix2d frame = splitting_frame(spec, x, opts);
  Eigen::Matrix2d frame_inv = frame.inverse();
  return [&spec, ws, frame_inv, opts](double t) {
    TorusPoint y = point_at_arclength(*ws, t);
    Direction2 eu = unstable_direction(spec, y, opts.depth);
    Eigen::Vector2d w = frame_inv * eu.vec();
    if (std::abs(w[0]) < 1e-12)
      throw ChartError("stable_slope_function: left the straightened slope chart");
    return w[1] / w[0];
  };
}

DiffReport differentiability_profile_from_slope(
    const std::function<double(double)>& theta,
    const std::vector<std::pair<double, double>>& ladder) {
  if (ladder.empty()) throw DomainError("differentiability_profile: empty ladder");
  DiffReport report;
  report.scales = ladder;
  double f0 = theta(0.0);
  for (auto [h1, h2] : ladder) {
    if (!(h1 > 0) || !(h2 > 0))
      throw DomainError("differentiability_profile: offsets must be positive");
    report.quotients.push_back(
        second_difference(theta(h1), f0, theta(-h2), h1, h2));
  }

  bool all_below = true;
  for (double q : report.quotients)
    if (q >= 1e-12) all_below = false;
  if (all_below) {
    report.affine_at_precision = true;
    report.fitted_rate = 0;
    return report;
  }

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < report.quotients.size(); ++i) {
    if (report.quotients[i] <= 0) continue;
    lx.push_back(std::log(ladder[i].first + ladder[i].second));
    ly.push_back(std::log(report.quotients[i]));
  }
  if (lx.size() >= 2)
    report.fitted_rate = ols(lx, ly, 0, lx.size()).slope;
  return report;
}

DiffReport differentiability_profile(const MapSpec& spec, const TorusPoint& x,
                                     const std::vector<std::pair<double, double>>& ladder,
                                     const SplittingOptions& opts) {
  double max_h = 0;
  for (auto [h1, h2] : ladder) max_h = std::max({max_h, h1, h2});
  auto theta = stable_slope_function(spec, x, max_h, opts);
  return differentiability_profile_from_slope(theta, ladder);
}

HolderReport derivative_holder_profile_from_slope(
    const std::function<double(double)>& theta, const std::vector<double>& scales,
    double fd_step, double floor) {
  if (!(fd_step > 0)) throw DomainError("derivative_holder_profile: fd_step <= 0");
  for (double t : scales)
    if (std::abs(t) < 10 * fd_step)
      throw DomainError(
          "derivative_holder_profile: scales must be >= 10 * fd_step");
  auto dtheta = [&](double t) {
    return (theta(t + fd_step) - theta(t - fd_step)) / (2 * fd_step);
  };
  double d0 = dtheta(0.0);
  std::vector<HolderSample> samples;
  samples.reserve(scales.size());
  for (double t : scales) samples.push_back({t, std::abs(dtheta(t) - d0)});
  return fit_holder(samples, floor);
}

HolderReport derivative_holder_profile(const MapSpec& spec, const TorusPoint& x,
                                       const std::vector<double>& scales,
                                       double fd_step, const SplittingOptions& opts) {
  double max_abs = 0;
  for (double t : scales) max_abs = std::max(max_abs, std::abs(t));
  auto theta = stable_slope_function(spec, x, max_abs + 2 * fd_step, opts);
  return derivative_holder_profile_from_slope(theta, scales, fd_step);
}

bool cone_membership(const std::vector<HolderSample>& samples,
                     const ConeParams& params) {
  for (const auto& s : samples) {
    double a = std::abs(s.t);
    if (a < params.eps0 || a > params.eps1) continue;
    if (s.deviation > params.constant_k * std::pow(a, params.alpha - params.eps))
      return false;
  }
  return true;
}

ConeReport cone_nesting_check(const MapSpec& spec, const ConeParams& params,
                              int big_n, int rounds, int trials,
                              std::uint64_t seed, int resolution,
                              const SplittingOptions& opts) {
  if (big_n < 1) throw DomainError("cone_nesting_check: big_n must be >= 1");
  if (rounds < 1 || trials < 1)
    throw DomainError("cone_nesting_check: rounds and trials must be >= 1");
  if (!(params.eps0 > 0) || !(params.eps0 < params.eps1))
    throw DomainError("cone_nesting_check: need 0 < eps0 < eps1");
  if (!(params.alpha > 0) || params.alpha > 2 || !(params.eps > 0) ||
      params.eps >= params.alpha)
    throw DomainError("cone_nesting_check: need alpha in (0,2], eps in (0,alpha)");

  // the paper's fixed point: shears vanish at 0, so 0 is phi-fixed
  TorusPoint base(0.0, 0.0);

  SlopeField eu_field(resolution);
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j)
      eu_field.at(i, j) = unstable_direction(spec, eu_field.node(i, j), opts.depth);

  // slowest one-step stable contraction over a deterministic sample set;
  // the generalization of the model map's 1/2
  double contraction = 0;
  for (const TorusPoint& p : low_discrepancy_points(2, 64))
    contraction = std::max(contraction, std::abs(stable_step_factor(spec, p, opts)));
  if (contraction >= 1)
    throw NotHyperbolic("cone_nesting_check: stable direction not contracting");

  // membership is tested along W_s(base) against e_u(base)
  double half = std::min(0.5, params.eps1 * 1.05 + 1e-4);
  double step = std::max(params.eps0 * std::pow(contraction, rounds) / 4, half / 8192);
  Polyline ws = grow_manifold(spec, {base, ManifoldKind::stable, half, step, 18},
                              opts);
  Direction2 eu_base = unstable_direction(spec, base, opts.depth);

  auto sample_field = [&](const SlopeField& field, double eps0_round) {
    std::vector<HolderSample> samples;
    for (double t = eps0_round; t <= params.eps1 * (1 + 1e-12);
         t *= 1.4142135623730951) {
      for (double sgn : {1.0, -1.0}) {
        TorusPoint y = point_at_arclength(ws, sgn * t);
        int pi = static_cast<int>(std::lround(y[0] * resolution)) % resolution;
        int pj = static_cast<int>(std::lround(y[1] * resolution)) % resolution;
        samples.push_back({sgn * t, angle_between(field.at(pi, pj), eu_base)});
      }
    }
    return samples;
  };

  ConeReport report;
  report.trials = trials;
  report.big_n = big_n;
  report.delta = params.delta;
  report.contraction_factor = contraction;
  report.rounds.assign(rounds, ConeRound{});

  std::vector<SlopeField> fields;
  fields.reserve(trials);
  for (int k = 0; k < trials; ++k) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(k));
    SlopeField f(resolution);
    for (std::size_t idx = 0; idx < f.values.size(); ++idx)
      f.values[idx] =
          eu_field.values[idx].rotated(uniform(rng, -params.delta, params.delta));
    fields.push_back(std::move(f));
  }

  double k_measured = 0;
  for (int r = 1; r <= rounds; ++r) {
    ConeRound& round = report.rounds[r - 1];
    round.round = r;
    round.eps0 = params.eps0 * std::pow(contraction, r);
    round.steps_applied = r * big_n;

    double max_ratio = 0;
    std::vector<std::vector<HolderSample>> trial_samples(trials);
    for (int k = 0; k < trials; ++k) {
      for (int s = 0; s < big_n; ++s)
        fields[k] = transform_field(spec, fields[k], 1, opts.entry_cap);
      trial_samples[k] = sample_field(fields[k], round.eps0);
      for (const auto& smp : trial_samples[k]) {
        double a = std::abs(smp.t);
        max_ratio =
            std::max(max_ratio, smp.deviation / std::pow(a, params.alpha - params.eps));
      }
    }
    round.max_ratio = max_ratio;
    if (r == 1) {
      k_measured = max_ratio;
      report.k_measured = k_measured;
      report.k_used =
          params.constant_k > 0 ? params.constant_k : k_measured * (1 + 1e-9);
    }

    ConeParams test = params;
    test.eps0 = round.eps0;
    test.constant_k = report.k_used;
    for (int k = 0; k < trials; ++k) {
      if (cone_membership(trial_samples[k], test))
        ++round.pass;
      else
        ++round.fail;
    }
  }
  return report;
}

nlohmann::json to_json(const HolderReport& r) {
  return {{"exponent", r.exponent},
          {"constant", r.constant},
          {"fit_range", {r.fit_range.first, r.fit_range.second}},
          {"r_squared", r.r_squared},
          {"n_samples", r.n_samples}};
}

nlohmann::json to_json(const DiffReport& r) {
  auto scales = nlohmann::json::array();
  for (auto [h1, h2] : r.scales) scales.push_back({h1, h2});
  return {{"scales", std::move(scales)},
          {"quotients", r.quotients},
          {"fitted_rate", r.fitted_rate},
          {"status", r.affine_at_precision ? "affine at this precision" : "ok"}};
}

nlohmann::json to_json(const ConeReport& r) {
  auto rounds = nlohmann::json::array();
  for (const auto& round : r.rounds)
    rounds.push_back({{"round", round.round},
                      {"eps0", round.eps0},
                      {"steps_applied", round.steps_applied},
                      {"max_ratio", round.max_ratio},
                      {"pass", round.pass},
                      {"fail", round.fail}});
  return {{"rounds", std::move(rounds)},
          {"k_measured", r.k_measured},
          {"k_used", r.k_used},
          {"contraction_factor", r.contraction_factor},
          {"trials", r.trials},
          {"big_n", r.big_n},
          {"delta", r.delta}};
}

}  // namespace anosovlab
