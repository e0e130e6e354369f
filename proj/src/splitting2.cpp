#include "anosovlab/splitting2.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "anosovlab/rng.hpp"

namespace anosovlab {

namespace {

// Internal view of the dynamics: forward runs phi, backward runs phi^{-1}.
// stable_direction is literally unstable_direction of the backward view, so
// the duality invariant holds bitwise.
struct DynView {
  const MapSpec* spec;
  bool backward;

  TorusPoint step(const TorusPoint& x) const {
    return backward ? apply_inverse(*spec, x) : apply_map(*spec, x);
  }
  TorusPoint unstep(const TorusPoint& x) const {
    return backward ? apply_map(*spec, x) : apply_inverse(*spec, x);
  }
  Eigen::Matrix2d step_jacobian(const TorusPoint& x) const {
    return backward ? Eigen::Matrix2d(inverse_step_jacobian(*spec, x))
                    : Eigen::Matrix2d(jacobian(*spec, x));
  }
  Direction2 expanding_seed() const {
    return backward ? default_stable_seed(*spec) : default_unstable_seed(*spec);
  }
  Direction2 contracting_seed() const {
    return backward ? default_unstable_seed(*spec) : default_stable_seed(*spec);
  }
};

void require_2d(const MapSpec& spec, const char* who) {
  if (spec.dim() != 2)
    throw DomainError(std::string(who) + ": requires a 2-torus map");
}

// Push the seed along the stored backward orbit orb[k] = unstep^k(x),
// renormalizing each step. Evaluating Jacobians at the stored points keeps
// the product on an orbit that ends exactly at x; re-deriving the forward
// orbit instead would compound fp error like the unstable growth rate.
Direction2 push_along(const DynView& view, const std::vector<TorusPoint>& orb,
                      int from_depth, Direction2 seed, double entry_cap) {
  if (angle_between(seed, view.contracting_seed()) < 1e-13)
    seed = seed.rotated(1e-3);  // measure-zero tie on the contracting line
  Eigen::Vector2d v = seed.vec();
  for (int k = from_depth; k >= 1; --k) {
    Eigen::Matrix2d j = view.step_jacobian(orb[k]);
    if (j.cwiseAbs().maxCoeff() > entry_cap)
      throw CocycleOverflow("direction iteration: step Jacobian exceeded entry cap");
    v = j * v;
    v.normalize();
  }
  return Direction2::of(v);
}

std::vector<TorusPoint> backward_orbit(const DynView& view, const TorusPoint& x,
                                       int depth) {
  std::vector<TorusPoint> orb(static_cast<std::size_t>(depth) + 1);
  orb[0] = x;
  for (int k = 1; k <= depth; ++k) orb[k] = view.unstep(orb[k - 1]);
  return orb;
}

Direction2 raw_iterate(const DynView& view, const TorusPoint& x, int n,
                       const Direction2& seed, double entry_cap) {
  auto orb = backward_orbit(view, x, n);
  return push_along(view, orb, n, seed, entry_cap);
}

CertifiedDirection certified_iterate(const DynView& view, const TorusPoint& x,
                                     const SplittingOptions& opts) {
  Direction2 seed = view.expanding_seed();
  auto orb = backward_orbit(view, x, opts.depth + opts.certificate_gap);
  Direction2 a = push_along(view, orb, opts.depth, seed, opts.entry_cap);
  Direction2 b = push_along(view, orb, opts.depth + opts.certificate_gap, seed,
                            opts.entry_cap);
  double cert = angle_between(a, b);
  return {a, cert, cert < opts.certificate_tol};
}

// 2x2 eigendirections of the linear part, exact quadratic formula
std::pair<Direction2, Direction2> linear_eigendirections(const MapSpec& spec) {
  require_2d(spec, "linear_eigendirections");
  const Mat& m = spec.linear().dbl();
  double tr = m(0, 0) + m(1, 1);
  double disc = tr * tr - 4.0 * m.determinant();
  if (disc <= 0)
    throw ConstructionError(
        "linear part has no real spectral splitting (not hyperbolic with det 1)");
  double root = std::sqrt(disc);
  double lu = (tr + (tr >= 0 ? root : -root)) / 2.0;  // larger-|.| eigenvalue
  double ls = m.determinant() / lu;
  auto eigvec = [&](double lam) {
    // rows of (m - lam I) are parallel; pick the better-conditioned kernel rep
    Eigen::Vector2d a(m(0, 1), lam - m(0, 0));
    Eigen::Vector2d b(lam - m(1, 1), m(1, 0));
    return Direction2::of(a.norm() >= b.norm() ? a : b);
  };
  return {eigvec(lu), eigvec(ls)};
}

}  // namespace

Direction2 Direction2::of(double x, double y) {
  double n = std::hypot(x, y);
  if (!(n > 0) || !std::isfinite(n))
    throw DomainError("Direction2: zero or non-finite vector");
  double a = x / n, b = y / n;
  if (a < 0 || (a == 0 && b < 0)) {
    a = -a;
    b = -b;
  }
  if (a == 0) a = 0.0;  // normalize -0.0
  Direction2 d;
  d.u1 = a;
  d.u2 = b;
  return d;
}

Direction2 Direction2::rotated(double phi) const {
  double c = std::cos(phi), s = std::sin(phi);
  return Direction2::of(c * u1 - s * u2, s * u1 + c * u2);
}

double angle_between(const Direction2& a, const Direction2& b) {
  double cross = std::abs(a.u1 * b.u2 - a.u2 * b.u1);
  double dot = std::abs(a.u1 * b.u1 + a.u2 * b.u2);
  return std::atan2(cross, dot);
}

Direction2 pushforward(const Eigen::Matrix2d& j, const Direction2& dir) {
  if (std::abs(j.determinant()) < 1e-300)
    throw ChartError("pushforward: singular matrix");
  Eigen::Vector2d w = j * dir.vec();
  return Direction2::of(w);
}

double slope_of(const Direction2& dir) {
  if (std::abs(dir.u1) <= 1e-12)
    throw ChartError("slope_of: direction too close to vertical for the slope chart");
  return dir.u2 / dir.u1;
}

double field_distance(const SlopeField& a, const SlopeField& b) {
  if (a.resolution != b.resolution)
    throw FieldMismatch("field_distance: resolution mismatch");
  double d = 0;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    d = std::max(d, angle_between(a.values[k], b.values[k]));
  return d;
}

SlopeField transform_field(const MapSpec& spec, const SlopeField& field, int n,
                           double entry_cap) {
  require_2d(spec, "transform_field");
  if (n < 1) throw DomainError("transform_field: n must be >= 1");
  const int N = field.resolution;
  DynView fwd{&spec, false};
  SlopeField out(N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      auto orb = backward_orbit(fwd, out.node(i, j), n);
      const TorusPoint& p = orb[n];
      // nearest grid node of p = phi^{-n}(node)
      int pi = static_cast<int>(std::lround(p[0] * N)) % N;
      int pj = static_cast<int>(std::lround(p[1] * N)) % N;
      // d(phi^n)(p) assembled along the stored orbit
      Eigen::Matrix2d dn = Eigen::Matrix2d::Identity();
      for (int k = n; k >= 1; --k) {
        dn = Eigen::Matrix2d(jacobian(spec, orb[k])) * dn;
        if (dn.cwiseAbs().maxCoeff() > entry_cap)
          throw CocycleOverflow("transform_field: cocycle exceeded entry cap");
      }
      out.at(i, j) = pushforward(dn, field.at(pi, pj));
    }
  }
  return out;
}

Direction2 default_unstable_seed(const MapSpec& spec) {
  return linear_eigendirections(spec).first;
}

Direction2 default_stable_seed(const MapSpec& spec) {
  return linear_eigendirections(spec).second;
}

Direction2 unstable_direction(const MapSpec& spec, const TorusPoint& x, int n) {
  return unstable_direction(spec, x, n, default_unstable_seed(spec));
}

Direction2 unstable_direction(const MapSpec& spec, const TorusPoint& x, int n,
                              const Direction2& seed) {
  require_2d(spec, "unstable_direction");
  if (n < 1) throw DomainError("unstable_direction: n must be >= 1");
  return raw_iterate({&spec, false}, x, n, seed, kDefaultEntryCap);
}

Direction2 stable_direction(const MapSpec& spec, const TorusPoint& x, int n) {
  return stable_direction(spec, x, n, default_stable_seed(spec));
}

Direction2 stable_direction(const MapSpec& spec, const TorusPoint& x, int n,
                            const Direction2& seed) {
  require_2d(spec, "stable_direction");
  if (n < 1) throw DomainError("stable_direction: n must be >= 1");
  return raw_iterate({&spec, true}, x, n, seed, kDefaultEntryCap);
}

CertifiedDirection unstable_direction_certified(const MapSpec& spec,
                                                const TorusPoint& x,
                                                const SplittingOptions& opts) {
  require_2d(spec, "unstable_direction_certified");
  return certified_iterate({&spec, false}, x, opts);
}

CertifiedDirection stable_direction_certified(const MapSpec& spec,
                                              const TorusPoint& x,
                                              const SplittingOptions& opts) {
  require_2d(spec, "stable_direction_certified");
  return certified_iterate({&spec, true}, x, opts);
}

double invariance_defect(const MapSpec& spec, const TorusPoint& x,
                         const std::function<Direction2(const TorusPoint&)>& field_at) {
  require_2d(spec, "invariance_defect");
  Direction2 pushed = pushforward(jacobian(spec, x), field_at(x));
  return angle_between(pushed, field_at(apply_map(spec, x)));
}

Eigen::Matrix2d splitting_frame(const MapSpec& spec, const TorusPoint& x,
                                const SplittingOptions& opts) {
  Direction2 eu = unstable_direction(spec, x, opts.depth);
  Direction2 es = stable_direction(spec, x, opts.depth);
  Eigen::Matrix2d frame;
  frame.col(0) = eu.vec();
  frame.col(1) = es.vec();
  return frame;
}

Eigen::Matrix2d straightened_cocycle(const MapSpec& spec, const TorusPoint& y,
                                     const TorusPoint& base, int n,
                                     const SplittingOptions& opts) {
  require_2d(spec, "straightened_cocycle");
  Eigen::Matrix2d b0 = splitting_frame(spec, base, opts);
  TorusPoint end = base;
  for (int k = 0; k < n; ++k) end = apply_map(spec, end);
  Eigen::Matrix2d b1 = splitting_frame(spec, end, opts);
  Eigen::Matrix2d dn = cocycle(spec, y, n, opts.entry_cap);
  return b1.inverse() * dn * b0;
}

std::vector<TorusPoint> low_discrepancy_points(int dim, int count) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  if (dim > 8) throw DomainError("low_discrepancy_points: dim too large");
  std::vector<TorusPoint> pts;
  pts.reserve(count);
  for (int k = 1; k <= count; ++k) {
    Vec v(dim);
    for (int a = 0; a < dim; ++a) v[a] = radical_inverse(k, primes[a]);
    pts.emplace_back(std::move(v));
  }
  return pts;
}

double stable_step_factor(const MapSpec& spec, const TorusPoint& x,
                          const SplittingOptions& opts) {
  Direction2 es = stable_direction(spec, x, opts.depth);
  Direction2 es_next = stable_direction(spec, apply_map(spec, x), opts.depth);
  Eigen::Vector2d pushed = Eigen::Matrix2d(jacobian(spec, x)) * es.vec();
  return pushed.dot(es_next.vec());
}

HyperbolicityEstimate finite_time_rates(const MapSpec& spec,
                                        const std::vector<TorusPoint>& sample_points,
                                        int n, const SplittingOptions& opts) {
  require_2d(spec, "finite_time_rates");
  if (n < 8) throw DomainError("finite_time_rates: n must be >= 8");
  if (sample_points.empty())
    throw DomainError("finite_time_rates: need at least one sample point");

  double lambda_hat = 0.0;
  double kappa_hat = 1e300;
  double min_onestep = 1e300, max_onestep = 0.0;
  std::vector<double> prefix_s(n + 1), prefix_u(n + 1);

  // log-growth ledger per sample; worst-case C comes in a second pass once
  // lambda_hat / kappa_hat are known
  std::vector<std::vector<double>> all_s, all_u;
  all_s.reserve(sample_points.size());
  all_u.reserve(sample_points.size());

  for (const TorusPoint& x : sample_points) {
    auto fwd = orbit(spec, x, n, OrbitDirection::forward);
    auto bwd = orbit(spec, x, n, OrbitDirection::backward);

    // stable directions along the forward orbit, unstable along the backward
    std::vector<Direction2> es(n + 1), eu(n + 1);
    for (int k = 0; k <= n; ++k) {
      es[k] = stable_direction(spec, fwd[k], opts.depth);
      eu[k] = unstable_direction(spec, bwd[k], opts.depth);
    }

    prefix_s[0] = prefix_u[0] = 0.0;
    for (int k = 0; k < n; ++k) {
      Eigen::Vector2d ps = Eigen::Matrix2d(jacobian(spec, fwd[k])) * es[k].vec();
      double fs = std::abs(ps.dot(es[k + 1].vec()));
      Eigen::Vector2d pu =
          Eigen::Matrix2d(inverse_step_jacobian(spec, bwd[k])) * eu[k].vec();
      double fu = std::abs(pu.dot(eu[k + 1].vec()));
      if (!(fs > 0) || !(fu > 0))
        throw NotHyperbolic("finite_time_rates: splitting collapsed along orbit");
      prefix_s[k + 1] = prefix_s[k] + std::log(fs);
      prefix_u[k + 1] = prefix_u[k] + std::log(fu);
      min_onestep = std::min({min_onestep, fs, fu});
      max_onestep = std::max({max_onestep, fs, fu});
    }

    double rate_s = std::exp(prefix_s[n] / n);
    double rate_u = std::exp(prefix_u[n] / n);
    lambda_hat = std::max({lambda_hat, rate_s, rate_u});
    kappa_hat = std::min({kappa_hat, rate_s, rate_u});
    all_s.push_back(std::vector<double>(prefix_s.begin(), prefix_s.end()));
    all_u.push_back(std::vector<double>(prefix_u.begin(), prefix_u.end()));
  }

  if (!(kappa_hat > 0) || lambda_hat >= 1.0 || kappa_hat >= 1.0) {
    std::ostringstream msg;
    msg << "not hyperbolic at this horizon: kappa_hat = " << kappa_hat
        << ", lambda_hat = " << lambda_hat;
    throw NotHyperbolic(msg.str());
  }

  double log_l = std::log(lambda_hat), log_k = std::log(kappa_hat);
  double big_c = 1.0;
  for (std::size_t s = 0; s < all_s.size(); ++s) {
    for (int m = 1; m <= n; ++m) {
      big_c = std::max(big_c, std::exp(all_s[s][m] - m * log_l));
      big_c = std::max(big_c, std::exp(all_u[s][m] - m * log_l));
      big_c = std::max(big_c, std::exp(m * log_k - all_s[s][m]));
      big_c = std::max(big_c, std::exp(m * log_k - all_u[s][m]));
    }
  }

  HyperbolicityEstimate est;
  est.kappa_hat = kappa_hat;
  est.lambda_hat = lambda_hat;
  est.big_c_hat = big_c;
  est.distortion_l_hat = max_onestep / min_onestep;
  est.alpha_max = std::min(2.0, 2.0 * log_l / log_k);
  est.horizon_n = n;
  return est;
}

nlohmann::json to_json(const HyperbolicityEstimate& est) {
  return {{"kappa_hat", est.kappa_hat},
          {"lambda_hat", est.lambda_hat},
          {"big_c_hat", est.big_c_hat},
          {"distortion_l_hat", est.distortion_l_hat},
          {"alpha_max", est.alpha_max},
          {"horizon_n", est.horizon_n}};
}

}  // namespace anosovlab
