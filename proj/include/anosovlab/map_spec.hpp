#pragma once

#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "anosovlab/torus.hpp"

namespace anosovlab {

using Jacobian = Eigen::MatrixXd;

// entry-magnitude cap for cocycle products; hyperbolic growth is exponential
// and this turns silent overflow into a typed error
inline constexpr double kDefaultEntryCap = 1e12;

// Integer d x d torus automorphism: |det| = 1 and no eigenvalue on the unit
// circle. The inverse is exact (adjugate over the +-1 determinant).
class LatticeMatrix {
 public:
  explicit LatticeMatrix(Eigen::MatrixXi entries);

  // skips validation; diagnostics-only escape hatch (the inverse is not
  // meaningful unless |det| = 1)
  static LatticeMatrix unchecked(Eigen::MatrixXi entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  long long det() const { return det_; }
  const Eigen::MatrixXi& entries() const { return entries_; }
  const Eigen::MatrixXi& inverse_entries() const { return inverse_; }
  const Mat& dbl() const { return dbl_; }
  const Mat& inverse_dbl() const { return inv_dbl_; }

  // number of eigenvalues outside the unit circle
  int unstable_count() const { return unstable_count_; }
  // min over eigenvalues of | |lambda| - 1 |
  double spectral_gap() const { return spectral_gap_; }

 private:
  LatticeMatrix() = default;
  void finish(bool validate);

  Eigen::MatrixXi entries_;
  Eigen::MatrixXi inverse_;
  Mat dbl_, inv_dbl_;
  long long det_ = 0;
  int unstable_count_ = 0;
  double spectral_gap_ = 0;
};

struct FourierTerm {
  int freq = 1;
  double sin_coeff = 0;
  double cos_coeff = 0;
};

// One volume-preserving shear h(x): x[target] += amplitude * s(x[source]).
// The profile is a 1-periodic trigonometric polynomial; cosine terms enter
// as cos(2*pi*k*t) - 1, which pins s(0) = 0 for every profile.
class ShearTerm {
 public:
  ShearTerm(int source_axis, int target_axis, double amplitude,
            std::vector<FourierTerm> profile);

  int source() const { return source_; }
  int target() const { return target_; }
  double amplitude() const { return amplitude_; }
  const std::vector<FourierTerm>& profile() const { return profile_; }

  double s(double t) const;   // profile value
  double ds(double t) const;  // profile derivative

 private:
  int source_, target_;
  double amplitude_;
  std::vector<FourierTerm> profile_;
};

// The map phi = A o h_k o ... o h_1 (shears first, integer automorphism
// last). Exactly invertible and exactly volume preserving by construction.
class MapSpec {
 public:
  MapSpec(LatticeMatrix linear, std::vector<ShearTerm> shears);

  // skips the det = +1 / axis-range checks; used to test diagnostics
  static MapSpec unchecked(LatticeMatrix linear, std::vector<ShearTerm> shears);

  int dim() const { return linear_.dim(); }
  const LatticeMatrix& linear() const { return linear_; }
  const std::vector<ShearTerm>& shears() const { return shears_; }

 private:
  MapSpec() = default;
  LatticeMatrix linear_{LatticeMatrix::unchecked(Eigen::MatrixXi::Identity(2, 2))};
  std::vector<ShearTerm> shears_;
};

enum class OrbitDirection { forward, backward };

TorusPoint apply_map(const MapSpec& spec, const TorusPoint& x);
TorusPoint apply_inverse(const MapSpec& spec, const TorusPoint& x);

// planar-lift versions; the lift of phi is a diffeomorphism of R^d and these
// never wrap (used to grow manifolds as continuous curves)
Vec apply_map_lift(const MapSpec& spec, const Vec& x);
Vec apply_inverse_lift(const MapSpec& spec, const Vec& x);

// exact chain-rule differentials
Jacobian jacobian(const MapSpec& spec, const TorusPoint& x);
// d(phi^{-1}) at x, i.e. the one-step Jacobian of the inverse map
Jacobian inverse_step_jacobian(const MapSpec& spec, const TorusPoint& x);

// d(phi^n)(x) for signed n as the ordered product of one-step Jacobians
// along the orbit; throws CocycleOverflow past entry_cap
Jacobian cocycle(const MapSpec& spec, const TorusPoint& x, int n,
                 double entry_cap = kDefaultEntryCap);

// [x, phi^{+-1} x, ..., phi^{+-n} x]
std::vector<TorusPoint> orbit(const MapSpec& spec, const TorusPoint& x, int n,
                              OrbitDirection direction);

// |det d(phi)(x) - 1|; diagnostic for the volume-preservation invariant
double volume_defect(const MapSpec& spec, const TorusPoint& x);
double volume_defect(const Jacobian& j);

// JSON wire format, the single source of truth consumed by the CLI:
// {"linear": [[int]], "shears": [{"source": int, "target": int,
//  "amplitude": float, "profile": [{"freq": int, "sin": float, "cos": float}]}]}
MapSpec map_spec_from_json(const nlohmann::json& j);
nlohmann::json map_spec_to_json(const MapSpec& spec);
MapSpec map_spec_from_json_text(const std::string& text);
std::string map_spec_to_json_text(const MapSpec& spec);

}  // namespace anosovlab
