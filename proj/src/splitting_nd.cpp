#include "anosovlab/splitting_nd.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "anosovlab/manifolds.hpp"
#include "anosovlab/rng.hpp"

namespace anosovlab {

Eigen::MatrixXd GraphMap::basis() const {
  Eigen::MatrixXd b(d_u() + d_s(), d_u());
  b.topRows(d_u()) = Eigen::MatrixXd::Identity(d_u(), d_u());
  b.bottomRows(d_s()) = matrix;
  return b;
}

BlockJacobian BlockJacobian::split(const Eigen::MatrixXd& j, int d_u) {
  const int d = static_cast<int>(j.rows());
  if (j.cols() != d || d_u <= 0 || d_u >= d)
    throw DomainError("BlockJacobian::split: bad dimensions");
  const int d_s = d - d_u;
  BlockJacobian b;
  b.A = j.topLeftCorner(d_u, d_u);
  b.B = j.topRightCorner(d_u, d_s);
  b.C = j.bottomLeftCorner(d_s, d_u);
  b.D = j.bottomRightCorner(d_s, d_s);
  return b;
}

Eigen::MatrixXd BlockJacobian::assemble() const {
  const int d_u = static_cast<int>(A.rows());
  const int d_s = static_cast<int>(D.rows());
  Eigen::MatrixXd j(d_u + d_s, d_u + d_s);
  j.topLeftCorner(d_u, d_u) = A;
  j.topRightCorner(d_u, d_s) = B;
  j.bottomLeftCorner(d_s, d_u) = C;
  j.bottomRightCorner(d_s, d_s) = D;
  return j;
}

GraphMap graph_transform(const BlockJacobian& j, const GraphMap& t) {
  if (j.A.rows() != t.d_u() || j.D.rows() != t.d_s())
    throw DomainError("graph_transform: block/graph dimension mismatch");
  Eigen::MatrixXd denom = j.A + j.B * t.matrix;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(denom);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0) || smax / smin > 1e12)
    throw ChartError(
        "graph chart left: candidate subspace is not a graph over the "
        "unstable reference");
  Eigen::MatrixXd numer = j.C + j.D * t.matrix;
  return GraphMap{denom.transpose()
                      .colPivHouseholderQr()
                      .solve(numer.transpose())
                      .transpose()};
}

ReferenceSplitting reference_splitting(const LatticeMatrix& linear) {
  const int d = linear.dim();
  Eigen::EigenSolver<Mat> es(linear.dbl());
  if (es.info() != Eigen::Success)
    throw ConstructionError("reference_splitting: eigensolver failed");

  Eigen::MatrixXd unstable(d, d), stable(d, d);
  int nu = 0, ns = 0;
  for (int i = 0; i < d; ++i) {
    std::complex<double> lam = es.eigenvalues()[i];
    Eigen::VectorXcd v = es.eigenvectors().col(i);
    bool grows = std::abs(lam) > 1.0;
    if (lam.imag() > 1e-12) {
      // complex pair: real and imaginary parts span the invariant plane
      if (grows) {
        unstable.col(nu++) = v.real();
        unstable.col(nu++) = v.imag();
      } else {
        stable.col(ns++) = v.real();
        stable.col(ns++) = v.imag();
      }
    } else if (std::abs(lam.imag()) <= 1e-12) {
      if (grows)
        unstable.col(nu++) = v.real();
      else
        stable.col(ns++) = v.real();
    }
    // conjugates with imag < 0 are covered by their partner
  }
  if (nu + ns != d)
    throw ConstructionError("reference_splitting: could not pair the spectrum");

  ReferenceSplitting ref;
  ref.d_u = nu;
  ref.d_s = ns;
  ref.frame.resize(d, d);
  Eigen::HouseholderQR<Eigen::MatrixXd> qu(unstable.leftCols(nu));
  ref.frame.leftCols(nu) =
      Eigen::MatrixXd(qu.householderQ()).leftCols(nu);
  Eigen::HouseholderQR<Eigen::MatrixXd> qs(stable.leftCols(ns));
  ref.frame.rightCols(ns) =
      Eigen::MatrixXd(qs.householderQ()).leftCols(ns);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ref.frame);
  double smin = svd.singularValues().minCoeff();
  if (!(smin > 1e-8))
    throw ConstructionError(
        "reference_splitting: defective or near-defective linear part");
  ref.frame_inv = ref.frame.inverse();
  return ref;
}

BlockJacobian reference_blocks(const MapSpec& spec, const ReferenceSplitting& ref,
                               const TorusPoint& x) {
  Eigen::MatrixXd j = ref.frame_inv * jacobian(spec, x) * ref.frame;
  return BlockJacobian::split(j, ref.d_u);
}

GraphMap unstable_graph(const MapSpec& spec, const TorusPoint& x, int n, int d_u,
                        const SplittingOptions& opts) {
  if (n < 1) throw DomainError("unstable_graph: n must be >= 1");
  ReferenceSplitting ref = reference_splitting(spec.linear());
  if (d_u != ref.d_u)
    throw DomainError("unstable_graph: d_u does not match the linear part's spectrum");

  // walk the stored backward orbit so the product ends exactly at x;
  // re-deriving forward points would compound fp error at the expansion rate
  std::vector<TorusPoint> orb(static_cast<std::size_t>(n) + 1);
  orb[0] = x;
  for (int k = 1; k <= n; ++k) orb[k] = apply_inverse(spec, orb[k - 1]);

  GraphMap t{Eigen::MatrixXd::Zero(ref.d_s, ref.d_u)};
  for (int k = n; k >= 1; --k) {
    try {
      t = graph_transform(reference_blocks(spec, ref, orb[k]), t);
    } catch (const ChartError& e) {
      throw ChartError(std::string(e.what()) + " (orbit index " +
                       std::to_string(n - k) + ")");
    }
  }
  return t;
}

Eigen::MatrixXd ambient_basis(const ReferenceSplitting& ref, const GraphMap& t) {
  return ref.frame * t.basis();
}

double principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DomainError("principal_angle: dimension mismatch");
  Eigen::HouseholderQR<Eigen::MatrixXd> qa(a), qb(b);
  Eigen::MatrixXd qa_thin = Eigen::MatrixXd(qa.householderQ()).leftCols(a.cols());
  Eigen::MatrixXd qb_thin = Eigen::MatrixXd(qb.householderQ()).leftCols(b.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(qa_thin.transpose() * qb_thin);
  double smin = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  return std::acos(smin);
}

double subspace_angle(const GraphMap& p, const GraphMap& q) {
  if (p.d_u() != q.d_u() || p.d_s() != q.d_s())
    throw DomainError("subspace_angle: dimension mismatch");
  return principal_angle(p.basis(), q.basis());
}

double operator_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::MatrixXd gram = m.transpose() * m;
  std::uint64_t state = 0x6A09E667F3BCC908ULL;  // fixed seed, reproducible reports
  Eigen::VectorXd v(gram.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = 0.5 + static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
  v.normalize();
  for (int it = 0; it < 64; ++it) {
    v = gram * v;
    double n = v.norm();
    if (n == 0) return 0;
    v /= n;
  }
  return std::sqrt(v.dot(gram * v));
}

double three_direction_second_difference(const std::array<double, 3>& f_rays,
                                         double f_base,
                                         const std::array<double, 3>& h,
                                         const std::vector<Vec>& rays) {
  if (rays.size() != 3)
    throw DomainError("three_direction_second_difference: need three rays");
  for (double hi : h)
    if (!(hi > 0))
      throw DomainError("three_direction_second_difference: offsets must be positive");
  Vec sum = rays[0] + rays[1] + rays[2];
  if (sum.norm() > 1e-12)
    throw DomainError("three_direction_second_difference: rays must sum to zero");
  double norm_sum = rays[0].norm() + rays[1].norm() + rays[2].norm();
  if (std::abs(norm_sum - 1.0) > 1e-9)
    throw DomainError(
        "three_direction_second_difference: ray norms must sum to one");
  double numer = h[1] * h[2] * f_rays[0] + h[0] * h[2] * f_rays[1] +
                 h[0] * h[1] * f_rays[2] -
                 (h[0] * h[1] + h[1] * h[2] + h[0] * h[2]) * f_base;
  return std::abs(numer) / (h[0] * h[1] * h[2]);
}

BlockGrowthReport block_growth_check(const MapSpec& spec, const TorusPoint& x,
                                     double t, int n_max,
                                     const SplittingOptions& opts) {
  if (spec.dim() != 2)
    throw DomainError(
        "block_growth_check: stable transversals are grown on the 2-torus only");
  if (n_max < 1) throw DomainError("block_growth_check: n_max must be >= 1");
  if (!(std::abs(t) > 0))
    throw DomainError("block_growth_check: need a nonzero transversal offset");

  HyperbolicityEstimate rates =
      finite_time_rates(spec, low_discrepancy_points(2, 64), 24, opts);

  double half = std::min(0.45, std::max(2.5 * std::abs(t), 1e-3));
  double step = std::max(std::abs(t) / 64, half / 4096);
  Polyline ws = grow_manifold(spec, {x, ManifoldKind::stable, half, step, 18}, opts);
  TorusPoint y = point_at_arclength(ws, t);

  // signed one-step factors of the straightened cocycle along both orbits
  auto factors = [&](const TorusPoint& start) {
    std::vector<double> fs(n_max), fu(n_max);
    TorusPoint p = start;
    Direction2 es = stable_direction(spec, p, opts.depth);
    Direction2 eu = unstable_direction(spec, p, opts.depth);
    for (int k = 0; k < n_max; ++k) {
      Eigen::Matrix2d j = jacobian(spec, p);
      TorusPoint next = apply_map(spec, p);
      Direction2 es_next = stable_direction(spec, next, opts.depth);
      Direction2 eu_next = unstable_direction(spec, next, opts.depth);
      fs[k] = (j * es.vec()).dot(es_next.vec());
      fu[k] = (j * eu.vec()).dot(eu_next.vec());
      p = next;
      es = es_next;
      eu = eu_next;
    }
    return std::pair(fs, fu);
  };
  auto [fs_y, fu_y] = factors(y);
  auto [fs_x, fu_x] = factors(x);

  BlockGrowthReport report;
  report.lambda_hat = rates.lambda_hat;
  report.t = t;
  double b_y = 1, b_x = 1, a_y = 1;
  double r_min = 0, l_min = 0;
  for (int n = 1; n <= n_max; ++n) {
    b_y *= fs_y[n - 1];
    b_x *= fs_x[n - 1];
    a_y *= fu_y[n - 1];
    BlockGrowthRow row;
    row.n = n;
    row.stable_diff = std::abs(b_y - b_x);
    double scale = std::pow(rates.lambda_hat, n) * std::abs(t);
    row.r_required = row.stable_diff / scale;
    row.a_inv_norm = 1.0 / std::abs(a_y);
    row.stable_norm = std::abs(b_y);
    r_min = std::max(r_min, row.r_required);
    l_min = std::max({l_min, row.a_inv_norm / std::pow(rates.lambda_hat, n),
                      row.stable_norm / std::pow(rates.lambda_hat, n)});
    report.rows.push_back(row);
  }
  report.r_min = r_min;
  report.l_min = l_min;
  return report;
}

nlohmann::json to_json(const GraphMap& t) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < t.matrix.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < t.matrix.cols(); ++c)
      row.push_back(t.matrix(r, c));
    rows.push_back(std::move(row));
  }
  return {{"d_u", t.d_u()}, {"d_s", t.d_s()}, {"matrix", std::move(rows)}};
}

GraphMap graph_map_from_json(const nlohmann::json& j) {
  int d_u = j.at("d_u").get<int>();
  int d_s = j.at("d_s").get<int>();
  Eigen::MatrixXd m(d_s, d_u);
  const auto& rows = j.at("matrix");
  if (static_cast<int>(rows.size()) != d_s)
    throw ConstructionError("graph map json: row count mismatch");
  for (int r = 0; r < d_s; ++r) {
    if (static_cast<int>(rows.at(r).size()) != d_u)
      throw ConstructionError("graph map json: column count mismatch");
    for (int c = 0; c < d_u; ++c) m(r, c) = rows.at(r).at(c).get<double>();
  }
  return GraphMap{std::move(m)};
}

nlohmann::json to_json(const BlockGrowthReport& r) {
  auto rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n},
                    {"stable_diff", row.stable_diff},
                    {"r_required", row.r_required},
                    {"a_inv_norm", row.a_inv_norm},
                    {"stable_norm", row.stable_norm}});
  return {{"rows", std::move(rows)},
          {"r_min", r.r_min},
          {"l_min", r.l_min},
          {"lambda_hat", r.lambda_hat},
          {"t", r.t}};
}

}  // namespace anosovlab
