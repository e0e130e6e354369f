#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "anosovlab/manifolds.hpp"

namespace anosovlab {

// one measurement along a stable transversal: signed arclength t, unsigned
// angle between E_u there and E_u at the base
struct HolderSample {
  double t = 0;
  double deviation = 0;
};

struct HolderReport {
  double exponent = 0;   // fitted beta
  double constant = 0;   // fitted K
  std::pair<double, double> fit_range{0, 0};
  double r_squared = 0;
  int n_samples = 0;
};

struct ConeParams {
  double delta = 0.2;
  double eps0 = 1e-3;
  double eps1 = 0.1;
  double constant_k = 0;  // <= 0 means "measure at round 1"
  double alpha = 1.0;
  double eps = 0.05;
};

struct DiffReport {
  std::vector<std::pair<double, double>> scales;  // (h1, h2), decreasing
  std::vector<double> quotients;                  // normalized second differences
  double fitted_rate = 0;                         // quotient = O((h1+h2)^rate)
  bool affine_at_precision = false;
};

// default geometric ladder t0 * r^k (both signs), r = sqrt 2, three decades
std::vector<double> default_scale_ladder(double t_min = 1e-4, double t_max = 1e-1,
                                         double ratio = 1.4142135623730951);

std::vector<HolderSample> stable_transversal_samples(
    const MapSpec& spec, const TorusPoint& x, const std::vector<double>& scales,
    const SplittingOptions& opts = {});

// OLS on log-log samples above the noise floor; the fit window is the widest
// contiguous block (>= 6 samples) whose residuals stay below 10% of the
// window's log-deviation range. Throws DegenerateFit when fewer than 6
// samples clear the floor.
HolderReport fit_holder(const std::vector<HolderSample>& samples,
                        double floor = 1e-12);

// |h2 f(x+h1) + h1 f(x-h2) - (h1+h2) f(x)| / (h1 h2)
double second_difference(double f_plus, double f_base, double f_minus, double h1,
                         double h2);

// signed slope of E_u(point_at(t)) in the (e_u(x), e_s(x)) frame; f(0) = 0
std::function<double(double)> stable_slope_function(const MapSpec& spec,
                                                    const TorusPoint& x,
                                                    double max_abs_t,
                                                    const SplittingOptions& opts = {});

DiffReport differentiability_profile(const MapSpec& spec, const TorusPoint& x,
                                     const std::vector<std::pair<double, double>>& ladder,
                                     const SplittingOptions& opts = {});
// injection seam: same fitting path, caller supplies the slope function
DiffReport differentiability_profile_from_slope(
    const std::function<double(double)>& theta,
    const std::vector<std::pair<double, double>>& ladder);

HolderReport derivative_holder_profile(const MapSpec& spec, const TorusPoint& x,
                                       const std::vector<double>& scales,
                                       double fd_step,
                                       const SplittingOptions& opts = {});
HolderReport derivative_holder_profile_from_slope(
    const std::function<double(double)>& theta, const std::vector<double>& scales,
    double fd_step, double floor = 1e-12);

// true iff every sample with eps0 <= |t| <= eps1 obeys
// deviation <= K |t|^(alpha - eps)
bool cone_membership(const std::vector<HolderSample>& samples,
                     const ConeParams& params);

struct ConeRound {
  int round = 0;
  double eps0 = 0;       // annulus inner radius used this round
  int steps_applied = 0; // cumulative one-step transforms
  double max_ratio = 0;  // max deviation / |t|^(alpha-eps) over trials
  int pass = 0;
  int fail = 0;
};

struct ConeReport {
  std::vector<ConeRound> rounds;
  double k_measured = 0;        // admissible K measured at round 1
  double k_used = 0;            // K the membership tests ran against
  double contraction_factor = 0;  // measured one-step stable contraction
  int trials = 0;
  int big_n = 0;
  double delta = 0;
};

// Prop-2.13-style experiment: random fields delta-close to the computed E_u
// field, pushed big_n steps per round; the annulus floor eps0 shrinks by the
// measured one-step stable contraction each round.
ConeReport cone_nesting_check(const MapSpec& spec, const ConeParams& params,
                              int big_n, int rounds, int trials,
                              std::uint64_t seed, int resolution = 128,
                              const SplittingOptions& opts = {});

nlohmann::json to_json(const HolderReport& r);
nlohmann::json to_json(const DiffReport& r);
nlohmann::json to_json(const ConeReport& r);

}  // namespace anosovlab
