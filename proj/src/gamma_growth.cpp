#include <cmath>

#include "anosovlab/manifolds.hpp"
#include "anosovlab/splitting2.hpp"

namespace anosovlab {

GammaGrowth gamma_growth(const MapSpec& spec, const TorusPoint& x, double t,
                         int n, const SplittingOptions& opts) {
  if (spec.dim() != 2) throw DomainError("gamma_growth: requires a 2-torus map");
  if (n < 0) throw DomainError("gamma_growth: n must be >= 0");

  TorusPoint y = x;
  if (t != 0.0) {
    double half = std::min(0.45, std::max(2.5 * std::abs(t), 1e-3));
    double step = std::max(std::abs(t) / 64, half / 4096);
    Polyline ws =
        grow_manifold(spec, {x, ManifoldKind::stable, half, step, 18}, opts);
    y = point_at_arclength(ws, t);
  }

  Eigen::Matrix2d m = straightened_cocycle(spec, y, x, n, opts);
  GammaGrowth g;
  g.gamma_n = m(1, 0);
  g.linear_bound_ratio = t == 0.0 ? 0.0 : g.gamma_n / std::abs(t);
  return g;
}

}  // namespace anosovlab
