#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "anosovlab/splitting2.hpp"

namespace anosovlab {

enum class ManifoldKind { unstable, stable };

struct ManifoldRequest {
  TorusPoint base;
  ManifoldKind kind = ManifoldKind::unstable;
  double half_length = 0.2;  // arclength each side; <= 0.5 to stay local
  double step = 0.01;        // target sample spacing
  int depth = 18;            // iterate-and-resample generations
};

// Local invariant manifold as a polyline. `lift` is the continuous planar
// lift (consecutive points are nearest lifts); the basepoint vertex lies in
// [0,1)^2 and has arclength 0.
struct Polyline {
  std::vector<Eigen::Vector2d> lift;
  std::vector<double> arclength;  // signed, strictly increasing
  std::size_t base_index = 0;
  ManifoldKind kind = ManifoldKind::unstable;
  bool self_intersection_warning = false;
  double tangent_defect_rad = 0;  // discrete tangent vs splitting direction

  TorusPoint base() const {
    return TorusPoint(Vec(lift[base_index]));
  }
  double negative_extent() const { return -arclength.front(); }
  double positive_extent() const { return arclength.back(); }
};

Polyline grow_manifold(const MapSpec& spec, const ManifoldRequest& req,
                       const SplittingOptions& opts = {});

// linear interpolation along the polyline; t = 0 is the base, out-of-range
// t is an error
TorusPoint point_at_arclength(const Polyline& p, double t);
Eigen::Vector2d lift_at_arclength(const Polyline& p, double t);

struct FigureEntry {
  std::size_t base_index = 0;
  ManifoldKind kind = ManifoldKind::unstable;
  bool ok = false;
  std::string error;  // set when !ok
  Polyline line;      // valid when ok
};

// one unstable and one stable polyline per base; per-base failures are
// collected, not fatal
std::vector<FigureEntry> figure_field(const MapSpec& spec,
                                      const std::vector<TorusPoint>& bases,
                                      double half_length,
                                      double step = 0.01, int depth = 18,
                                      const SplittingOptions& opts = {});

// SVG with viewBox "0 0 1 1"; unstable strokes "blue", stable "red"; one
// path element per wrapped segment
void write_figure_svg(std::ostream& os, const std::vector<FigureEntry>& entries);

// CSV "base_index,kind,t,x,y"; failed bases appear as comment lines
void write_figure_csv(std::ostream& os, const std::vector<FigureEntry>& entries);

}  // namespace anosovlab
