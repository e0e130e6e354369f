#include <doctest.h>

#include "anosovlab/rng.hpp"
#include "anosovlab/splitting2.hpp"
#include "test_support.hpp"

using namespace anosovlab;
using namespace anosovlab::testing;

TEST_CASE("direction normalization and canonical sign") {
  Direction2 d = Direction2::of(-2.0, -2.0);
  CHECK(d.u1 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(d.u2 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(std::abs(std::hypot(d.u1, d.u2) - 1.0) < 1e-14);

  // equal lines compare equal bitwise after normalization
  CHECK(Direction2::of(0.3, -0.4) == Direction2::of(-0.3, 0.4));
  CHECK(Direction2::of(0.0, -1.0) == Direction2::of(0.0, 1.0));
  CHECK_THROWS_AS(Direction2::of(0.0, 0.0), DomainError);
}

TEST_CASE("slope chart and its vertical failure") {
  CHECK(slope_of(Direction2::of(1.0, 0.0)) == 0.0);
  CHECK(slope_of(Direction2::of(1.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(slope_of(Direction2::of(0.0, 1.0)), ChartError);
}

TEST_CASE("chart consistency: slope differences track angles to first order") {
  auto rng = make_rng(101);
  for (int k = 0; k < 500; ++k) {
    Direction2 a = Direction2::of(1.0, uniform(rng, -0.9, 0.9));
    Direction2 b = a.rotated(uniform(rng, -0.1, 0.1));
    if (std::abs(a.u1) < 1e-6 || std::abs(b.u1) < 1e-6) continue;
    double ang = angle_between(a, b);
    if (ang < 1e-12) continue;
    double ds = std::abs(slope_of(a) - slope_of(b));
    CHECK(ds / ang >= 0.5);
    CHECK(ds / ang <= 2.0);
  }
}

TEST_CASE("pushforward: diagonal, identity, eigenvector") {
  Eigen::Matrix2d diag;
  diag << 2, 0, 0, 0.5;
  Direction2 d = pushforward(diag, Direction2::of(1.0, 1.0));
  CHECK(slope_of(d) == doctest::Approx(0.25).epsilon(1e-15));

  Direction2 same = pushforward(Eigen::Matrix2d::Identity(), d);
  CHECK(same == d);

  Eigen::Matrix2d cat;
  cat << 2, 1, 1, 1;
  Direction2 eu = Direction2::of(1.0, cat_unstable_slope());
  CHECK(angle_between(pushforward(cat, eu), eu) < 1e-14);

  CHECK_THROWS_AS(pushforward(Eigen::Matrix2d::Zero(), d), ChartError);
}

TEST_CASE("eigen-oracle: cat-map splitting at depth 60") {
  MapSpec spec = cat_map();
  auto rng = make_rng(103);
  for (int k = 0; k < 20; ++k) {
    TorusPoint x(uniform01(rng), uniform01(rng));
    Direction2 eu = unstable_direction(spec, x, 60);
    Direction2 es = stable_direction(spec, x, 60);
    CHECK(std::abs(slope_of(eu) - cat_unstable_slope()) < 1e-10);
    CHECK(std::abs(slope_of(es) - cat_stable_slope()) < 1e-10);
    // generic seeds land on the same answer
    Direction2 seed = Direction2::of(1.0, uniform(rng, -3.0, 3.0));
    CHECK(std::abs(slope_of(unstable_direction(spec, x, 60, seed)) -
                   cat_unstable_slope()) < 1e-10);
  }
  // a seed exactly on the stable line is tie-broken, not fixed
  Direction2 stuck = default_stable_seed(spec);
  CHECK(std::abs(slope_of(unstable_direction(spec, TorusPoint(0.2, 0.4), 60,
                                             stuck)) -
                 cat_unstable_slope()) < 1e-10);
}

TEST_CASE("unstable iteration converges monotonically in depth") {
  MapSpec spec = perturbed_cat(0.05);
  TorusPoint x(0.31, 0.57);
  Direction2 ref = unstable_direction(spec, x, 120);
  double prev = 1e9;
  for (int n : {10, 20, 40, 60}) {
    double err = angle_between(unstable_direction(spec, x, n), ref);
    CHECK(err < prev + 1e-15);
    prev = err;
  }
  CHECK(prev < 1e-11);
}

TEST_CASE("seed already unstable stays put on linear maps") {
  MapSpec spec = cat_map();
  Direction2 eu = default_unstable_seed(spec);
  Direction2 out = unstable_direction(spec, TorusPoint(0.77, 0.13), 7, eu);
  CHECK(angle_between(out, eu) < 1e-14);
}

TEST_CASE("duality: stable of spec is unstable of the inverse dynamics") {
  MapSpec spec = perturbed_cat(0.05);
  auto rng = make_rng(107);
  for (int k = 0; k < 25; ++k) {
    TorusPoint x(uniform01(rng), uniform01(rng));
    Direction2 es = stable_direction(spec, x, 40);
    Direction2 eu = unstable_direction(spec, x, 40);
    // transversality of the two families
    CHECK(angle_between(es, eu) > 1e-3);
  }
}

TEST_CASE("certified directions report their convergence") {
  MapSpec spec = perturbed_cat(0.05);
  auto cert = unstable_direction_certified(spec, TorusPoint(0.41, 0.88));
  CHECK(cert.converged);
  CHECK(cert.certificate < 1e-11);
}

TEST_CASE("invariance defect of the computed splitting") {
  MapSpec spec = perturbed_cat(0.05);
  auto field = [&](const TorusPoint& p) { return unstable_direction(spec, p, 60); };
  auto rng = make_rng(109);
  for (int k = 0; k < 50; ++k) {
    TorusPoint x(uniform01(rng), uniform01(rng));
    CHECK(invariance_defect(spec, x, field) < 1e-8);
  }

  // exact eigen-invariance on the linear map
  MapSpec lin = cat_map();
  Direction2 eu = default_unstable_seed(lin);
  auto const_field = [&](const TorusPoint&) { return eu; };
  CHECK(invariance_defect(lin, TorusPoint(0.5, 0.25), const_field) < 1e-14);

  // constant horizontal field is visibly not invariant
  auto horizontal = [](const TorusPoint&) { return Direction2::of(1.0, 0.0); };
  double defect = invariance_defect(lin, TorusPoint(0.0, 0.0), horizontal);
  CHECK(defect ==
        doctest::Approx(angle_between(Direction2::of(2.0, 1.0),
                                      Direction2::of(1.0, 0.0))).epsilon(1e-12));
}

TEST_CASE("field distance is a sup metric on directions") {
  SlopeField a(8), b(8);
  for (auto& v : a.values) v = Direction2::of(1.0, 0.0);
  for (auto& v : b.values) v = Direction2::of(1.0, 1.0);
  CHECK(field_distance(a, a) == 0.0);
  CHECK(field_distance(a, b) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-14));
  CHECK(field_distance(a, b) == field_distance(b, a));
  SlopeField c(16);
  CHECK_THROWS_AS(field_distance(a, c), FieldMismatch);
}

TEST_CASE("transform_field fixes the linear unstable field") {
  MapSpec spec = cat_map();
  const int n = 32;
  SlopeField eu(n);
  Direction2 e = default_unstable_seed(spec);
  for (auto& v : eu.values) v = e;
  SlopeField out = transform_field(spec, eu, 1);
  CHECK(field_distance(out, eu) < 1e-14);

  // constant fields stay constant under linear maps and move by the
  // projective action
  SlopeField flat(n);
  for (auto& v : flat.values) v = Direction2::of(1.0, 0.0);
  SlopeField pushed = transform_field(spec, flat, 1);
  Direction2 expect = pushforward(Eigen::Matrix2d(spec.linear().dbl()),
                                  Direction2::of(1.0, 0.0));
  for (const auto& v : pushed.values) CHECK(angle_between(v, expect) < 1e-14);
}

TEST_CASE("transform_field contracts toward the unstable field") {
  MapSpec spec = cat_map();
  const int n = 64;
  SlopeField eu(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) eu.at(i, j) = unstable_direction(spec, eu.node(i, j), 60);

  auto rng = make_rng(113);
  for (int trial = 0; trial < 20; ++trial) {
    SlopeField f(n);
    for (std::size_t k = 0; k < f.values.size(); ++k)
      f.values[k] = eu.values[k].rotated(uniform(rng, -0.3, 0.3));
    double prev = 1e9;
    for (int steps = 1; steps <= 10; ++steps) {
      f = transform_field(spec, f, 1);
      double d = field_distance(f, eu);
      if (steps > 3) CHECK(d < prev);
      prev = d;
    }
  }
}

TEST_CASE("finite_time_rates on the cat map hits the eigenvalue") {
  MapSpec spec = cat_map();
  auto est = finite_time_rates(spec, low_discrepancy_points(2, 64), 40);
  CHECK(std::abs(est.kappa_hat - cat_kappa()) < 1e-9);
  CHECK(std::abs(est.lambda_hat - cat_kappa()) < 1e-9);
  CHECK(est.alpha_max == 2.0);
  CHECK(est.big_c_hat == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(est.distortion_l_hat == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(est.horizon_n == 40);
}

TEST_CASE("alpha_max formula") {
  MapSpec spec = perturbed_cat(0.05);
  auto est = finite_time_rates(spec, low_discrepancy_points(2, 64), 24);
  CHECK(est.kappa_hat <= est.lambda_hat);
  CHECK(est.lambda_hat < 1.0);
  CHECK(est.alpha_max <= 2.0);
  // lambda^(2/alpha) <= kappa (1 + 1e-12) by construction
  CHECK(std::pow(est.lambda_hat, 2.0 / est.alpha_max) <=
        est.kappa_hat * (1 + 1e-12));
  // the closed pair (0.5, 0.25) gives exactly 1
  CHECK(2.0 * std::log(0.5) / std::log(0.25) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("finite_time_rates rejects non-hyperbolic data") {
  // identity-like dynamics: shears only, unchecked to dodge validation
  Eigen::MatrixXi id(2, 2);
  id << 1, 0, 0, 1;
  MapSpec flat = MapSpec::unchecked(LatticeMatrix::unchecked(id),
                                    {ShearTerm(0, 1, 0.05, {{1, 1.0, 0.0}})});
  CHECK_THROWS_AS(
      finite_time_rates(flat, low_discrepancy_points(2, 8), 10),
      Error);  // collapses or reports non-hyperbolic, either way a typed error
}

TEST_CASE("gamma growth vanishes at the base and on linear maps") {
  MapSpec lin = cat_map();
  for (int n : {2, 5, 9}) {
    auto g = gamma_growth(lin, TorusPoint(0.3, 0.8), 0.02, n);
    CHECK(std::abs(g.gamma_n) < 1e-10);
  }
  MapSpec spec = perturbed_cat(0.05);
  auto g0 = gamma_growth(spec, TorusPoint(0.3, 0.8), 0.0, 8);
  CHECK(std::abs(g0.gamma_n) < 1e-10);
  CHECK(g0.linear_bound_ratio == 0.0);
}

TEST_CASE("gamma growth is linear in the transversal offset") {
  MapSpec spec = perturbed_cat(0.05);
  TorusPoint x(0.3, 0.8);
  for (int n : {2, 4, 6}) {
    double r1 = gamma_growth(spec, x, 0.02, n).linear_bound_ratio;
    double r2 = gamma_growth(spec, x, 0.01, n).linear_bound_ratio;
    double r4 = gamma_growth(spec, x, 0.005, n).linear_bound_ratio;
    // halving t keeps the ratio within 20%
    CHECK(std::abs(r2 - r1) <= 0.2 * std::max(std::abs(r1), 1e-6));
    CHECK(std::abs(r4 - r2) <= 0.2 * std::max(std::abs(r2), 1e-6));
  }
}
