#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "anosovlab/map_spec.hpp"

namespace anosovlab {

// A point of the projective line: unit vector with canonical sign (first
// nonzero component positive), so equal lines compare equal bitwise.
struct Direction2 {
  double u1 = 1.0;
  double u2 = 0.0;

  static Direction2 of(double x, double y);
  static Direction2 of(const Eigen::Vector2d& v) { return of(v[0], v[1]); }

  Eigen::Vector2d vec() const { return {u1, u2}; }
  // rotate the underlying line by phi radians (canonicalized again)
  Direction2 rotated(double phi) const;

  bool operator==(const Direction2&) const = default;
};

// unsigned angle between the lines, in [0, pi/2]
double angle_between(const Direction2& a, const Direction2& b);

// projective action of a nonsingular matrix
Direction2 pushforward(const Eigen::Matrix2d& j, const Direction2& dir);

// slope chart u2/u1; fails for (near-)vertical lines
double slope_of(const Direction2& dir);

// Grid-sampled line field on T^2; node (i,j) sits at (i/N, j/N).
struct SlopeField {
  int resolution = 0;
  std::vector<Direction2> values;  // row-major, index i*N + j

  SlopeField() = default;
  explicit SlopeField(int n)
      : resolution(n), values(static_cast<std::size_t>(n) * n) {}

  Direction2& at(int i, int j) { return values[idx(i, j)]; }
  const Direction2& at(int i, int j) const { return values[idx(i, j)]; }
  TorusPoint node(int i, int j) const {
    return TorusPoint(static_cast<double>(i) / resolution,
                      static_cast<double>(j) / resolution);
  }
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * resolution + j;
  }
};

// sup over nodes of the unsigned angle between the two fields
double field_distance(const SlopeField& a, const SlopeField& b);

// The transform (T_n v)(x) = dphi^n(p) v(p), p = phi^{-n}(x); v is read by
// nearest-grid-node lookup.
SlopeField transform_field(const MapSpec& spec, const SlopeField& field, int n,
                           double entry_cap = kDefaultEntryCap);

struct SplittingOptions {
  int depth = 60;              // projective iteration depth
  int certificate_gap = 10;    // compare against depth + gap
  double certificate_tol = 1e-11;
  double entry_cap = kDefaultEntryCap;
};

struct CertifiedDirection {
  Direction2 dir;
  double certificate;  // angle(result_n, result_{n+gap})
  bool converged;      // certificate < tolerance
};

// default power-iteration seeds: the linear part's unstable/stable
// eigendirections (d = 2 only)
Direction2 default_unstable_seed(const MapSpec& spec);
Direction2 default_stable_seed(const MapSpec& spec);

// E_u(x) estimated by pushing the seed n steps forward from phi^{-n}(x),
// renormalizing each step (projectively equal to pushforward(dphi^n(p), seed))
Direction2 unstable_direction(const MapSpec& spec, const TorusPoint& x, int n);
Direction2 unstable_direction(const MapSpec& spec, const TorusPoint& x, int n,
                              const Direction2& seed);
// dual construction: the same iteration for the inverse map
Direction2 stable_direction(const MapSpec& spec, const TorusPoint& x, int n);
Direction2 stable_direction(const MapSpec& spec, const TorusPoint& x, int n,
                            const Direction2& seed);

CertifiedDirection unstable_direction_certified(const MapSpec& spec,
                                                const TorusPoint& x,
                                                const SplittingOptions& opts = {});
CertifiedDirection stable_direction_certified(const MapSpec& spec,
                                              const TorusPoint& x,
                                              const SplittingOptions& opts = {});

// angle between dphi(x) field(x) and field(phi x)
double invariance_defect(const MapSpec& spec, const TorusPoint& x,
                         const std::function<Direction2(const TorusPoint&)>& field_at);

// columns (e_u(x), e_s(x)); the frame of the straightening charts
Eigen::Matrix2d splitting_frame(const MapSpec& spec, const TorusPoint& x,
                                const SplittingOptions& opts = {});

// dphi^n(y) expressed in the splitting frames at the base orbit endpoints:
// frame(phi^n(base))^{-1} * dphi^n(y) * frame(base)
Eigen::Matrix2d straightened_cocycle(const MapSpec& spec, const TorusPoint& y,
                                     const TorusPoint& base, int n,
                                     const SplittingOptions& opts = {});

// Finite-time estimates of the contraction constants. Rates are n-step
// geometric means of the signed one-step contraction factors along orbits,
// evaluated on the computed splitting (stable in both time directions).
struct HyperbolicityEstimate {
  double kappa_hat = 0;
  double lambda_hat = 0;
  double big_c_hat = 1;
  double distortion_l_hat = 1;
  double alpha_max = 2;
  int horizon_n = 0;
};

HyperbolicityEstimate finite_time_rates(const MapSpec& spec,
                                        const std::vector<TorusPoint>& sample_points,
                                        int n, const SplittingOptions& opts = {});

nlohmann::json to_json(const HyperbolicityEstimate& est);

// deterministic low-discrepancy sample set (Halton)
std::vector<TorusPoint> low_discrepancy_points(int dim, int count);

// signed one-step factor <dphi(x) e_s(x), e_s(phi x)> (and the unstable /
// backward analogues); |factor| is the one-step contraction
double stable_step_factor(const MapSpec& spec, const TorusPoint& x,
                          const SplittingOptions& opts = {});

struct GammaGrowth {
  double gamma_n = 0;            // lower-left entry of the straightened cocycle
  double linear_bound_ratio = 0; // gamma_n / |t| (0 at t = 0)
};

// Straightens at base x, takes y on W_s(x) at arclength t, and reads the
// coupling entry gamma_n of dphi^n(y) in the straightened frames.
// Defined in gamma_growth.cpp (needs manifold growth).
GammaGrowth gamma_growth(const MapSpec& spec, const TorusPoint& x, double t,
                         int n, const SplittingOptions& opts = {});

}  // namespace anosovlab
