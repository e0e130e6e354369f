#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "anosovlab/splitting2.hpp"

namespace anosovlab {

// Candidate unstable subspace as the graph {(u, Tu)} of T: R^{d_u} -> R^{d_s}
// in a fixed reference splitting of R^d.
struct GraphMap {
  Eigen::MatrixXd matrix;  // d_s x d_u

  int d_u() const { return static_cast<int>(matrix.cols()); }
  int d_s() const { return static_cast<int>(matrix.rows()); }
  // basis of the graph subspace, [I; T], (d_u + d_s) x d_u
  Eigen::MatrixXd basis() const;
};

// Blocks of a Jacobian in a splitting R^d = R^{d_u} + R^{d_s}
struct BlockJacobian {
  Eigen::MatrixXd A;  // d_u x d_u
  Eigen::MatrixXd B;  // d_u x d_s
  Eigen::MatrixXd C;  // d_s x d_u
  Eigen::MatrixXd D;  // d_s x d_s

  static BlockJacobian split(const Eigen::MatrixXd& j, int d_u);
  Eigen::MatrixXd assemble() const;
};

// induced action on graphs: T' = (C + D T)(A + B T)^{-1}; throws ChartError
// when A + BT has condition number above 1e12
GraphMap graph_transform(const BlockJacobian& j, const GraphMap& t);

// Spectral splitting of an integer hyperbolic matrix: generalized eigenspaces
// inside/outside the unit circle, each block orthonormalized. Rejects
// defective linear parts.
struct ReferenceSplitting {
  Eigen::MatrixXd frame;      // d x d, columns [U | S]
  Eigen::MatrixXd frame_inv;
  int d_u = 0;
  int d_s = 0;
};

ReferenceSplitting reference_splitting(const LatticeMatrix& linear);

// blocks of dphi at x expressed in the reference frame
BlockJacobian reference_blocks(const MapSpec& spec, const ReferenceSplitting& ref,
                               const TorusPoint& x);

// iterate graph_transform along the backward orbit of x, starting from T = 0
GraphMap unstable_graph(const MapSpec& spec, const TorusPoint& x, int n, int d_u,
                        const SplittingOptions& opts = {});

// ambient-coordinate basis of the graph subspace, frame * [I; T]
Eigen::MatrixXd ambient_basis(const ReferenceSplitting& ref, const GraphMap& t);

// largest principal angle between the graph subspaces
double subspace_angle(const GraphMap& p, const GraphMap& q);
// largest principal angle between the column spans of two ambient bases
double principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// operator norm via 64 power-method iterations on M^T M, deterministic start
double operator_norm(const Eigen::MatrixXd& m);

// |h2 h3 f1 + h1 h3 f2 + h1 h2 f3 - (h1h2 + h2h3 + h1h3) f0| / (h1 h2 h3)
// for samples f_i = f(c_i(h_i)) along three rays with sum 0 and norms
// summing to 1
double three_direction_second_difference(const std::array<double, 3>& f_rays,
                                         double f_base,
                                         const std::array<double, 3>& h,
                                         const std::vector<Vec>& rays);

struct BlockGrowthRow {
  int n = 0;
  double stable_diff = 0;       // |B_n(y) - B_n(x)|
  double r_required = 0;        // stable_diff / (lambda^n |t|)
  double a_inv_norm = 0;        // |A_n(y)^{-1}|
  double stable_norm = 0;       // |B_n(y)|
};

struct BlockGrowthReport {
  std::vector<BlockGrowthRow> rows;
  double r_min = 0;        // minimal R making |B_n(y)-B_n(x)| <= R lambda^n |t|
  double l_min = 0;        // minimal L for |A_n^{-1}|, |B_n| <= L lambda^n
  double lambda_hat = 0;
  double t = 0;
};

// Per-n diagnostics of the straightened cocycle blocks along a stable
// transversal (d = 2). Blocks are the signed one-step products in the moving
// splitting frames, so the decay scales are not drowned by unstable
// contamination.
BlockGrowthReport block_growth_check(const MapSpec& spec, const TorusPoint& x,
                                     double t, int n_max,
                                     const SplittingOptions& opts = {});

nlohmann::json to_json(const GraphMap& t);
GraphMap graph_map_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BlockGrowthReport& r);

}  // namespace anosovlab
