#pragma once

#include <Eigen/Core>

#include "anosovlab/errors.hpp"

namespace anosovlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// wrap a coordinate into [0,1)
inline double wrap_unit(double t) {
  double w = t - std::floor(t);
  if (w >= 1.0) w -= 1.0;  // guards t = -1e-17 rounding up
  if (w < 0.0) w += 1.0;
  return w;
}

// signed representative of t mod 1 in [-1/2, 1/2)
inline double wrap_signed(double t) {
  double w = wrap_unit(t);
  return w >= 0.5 ? w - 1.0 : w;
}

// A point of the d-torus [0,1)^d. Construction wraps, so coordinates always
// hold the invariant.
struct TorusPoint {
  Vec coords;

  TorusPoint() = default;
  explicit TorusPoint(Vec v) : coords(std::move(v)) {
    for (Eigen::Index i = 0; i < coords.size(); ++i)
      coords[i] = wrap_unit(coords[i]);
  }
  TorusPoint(double x, double y) : TorusPoint(Eigen::Vector2d(x, y)) {}

  int dim() const { return static_cast<int>(coords.size()); }
  double operator[](int i) const { return coords[i]; }
};

// shortest displacement from b to a, componentwise in [-1/2, 1/2)
inline Vec torus_delta(const TorusPoint& a, const TorusPoint& b) {
  if (a.dim() != b.dim()) throw FieldMismatch("torus_delta: dimension mismatch");
  Vec d(a.dim());
  for (int i = 0; i < a.dim(); ++i) d[i] = wrap_signed(a[i] - b[i]);
  return d;
}

// wrap-aware Euclidean distance; bounded by sqrt(d)/2
inline double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  return torus_delta(a, b).norm();
}

}  // namespace anosovlab
