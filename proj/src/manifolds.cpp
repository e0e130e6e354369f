#include "anosovlab/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace anosovlab {

namespace {

constexpr double kMaxTurnAngle = 0.2;  // rad, per-step curvature trigger

struct LiftedCurve {
  std::vector<Eigen::Vector2d> pts;
  std::size_t base = 0;

  // signed cumulative chord length, 0 at base
  std::vector<double> arclengths() const {
    std::vector<double> c(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
      c[i] = c[i - 1] + (pts[i] - pts[i - 1]).norm();
    double off = c[base];
    for (double& v : c) v -= off;
    return c;
  }
};

Eigen::Vector2d interp(const std::vector<Eigen::Vector2d>& pts,
                       const std::vector<double>& cum, double t) {
  auto it = std::lower_bound(cum.begin(), cum.end(), t);
  if (it == cum.begin()) return pts.front();
  if (it == cum.end()) return pts.back();
  std::size_t hi = static_cast<std::size_t>(it - cum.begin());
  if (cum[hi] == t) return pts[hi];
  std::size_t lo = hi - 1;
  double span = cum[hi] - cum[lo];
  if (span <= 0) return pts[lo];
  double w = (t - cum[lo]) / span;
  return pts[lo] + w * (pts[hi] - pts[lo]);
}

// resample at uniform spacing per branch; t = 0 keeps the exact base vertex
LiftedCurve resample(const LiftedCurve& in, double spacing_neg, double limit_neg,
                     double spacing_pos, double limit_pos) {
  auto cum = in.arclengths();
  double ext_neg = std::min(-cum.front(), limit_neg);
  double ext_pos = std::min(cum.back(), limit_pos);
  int n_neg = std::max(0, static_cast<int>(std::floor(ext_neg / spacing_neg + 1e-9)));
  int n_pos = std::max(0, static_cast<int>(std::floor(ext_pos / spacing_pos + 1e-9)));
  LiftedCurve out;
  out.pts.reserve(n_neg + n_pos + 1);
  for (int k = n_neg; k >= 1; --k)
    out.pts.push_back(interp(in.pts, cum, -k * spacing_neg));
  out.base = out.pts.size();
  out.pts.push_back(in.pts[in.base]);
  for (int k = 1; k <= n_pos; ++k)
    out.pts.push_back(interp(in.pts, cum, k * spacing_pos));
  return out;
}

double max_turn_angle(const std::vector<Eigen::Vector2d>& pts) {
  double worst = 0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    Eigen::Vector2d a = pts[i] - pts[i - 1];
    Eigen::Vector2d b = pts[i + 1] - pts[i];
    double na = a.norm(), nb = b.norm();
    if (na == 0 || nb == 0) continue;
    double cross = std::abs(a.x() * b.y() - a.y() * b.x());
    double dot = a.dot(b);
    worst = std::max(worst, std::atan2(cross, dot));
  }
  return worst;
}

bool segments_cross(const Eigen::Vector2d& a0, const Eigen::Vector2d& a1,
                    const Eigen::Vector2d& b0, const Eigen::Vector2d& b1) {
  auto orient = [](const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                   const Eigen::Vector2d& r) {
    return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
  };
  double o1 = orient(a0, a1, b0), o2 = orient(a0, a1, b1);
  double o3 = orient(b0, b1, a0), o4 = orient(b0, b1, a1);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) &&
         o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

// proper crossings between non-adjacent segments, wrap-aware via nearest
// translate; hashed by a coarse wrapped grid to stay near-linear
bool has_self_intersection(const std::vector<Eigen::Vector2d>& pts) {
  std::size_t m = pts.size();
  if (m < 4) return false;
  double max_seg = 0;
  for (std::size_t i = 1; i < m; ++i)
    max_seg = std::max(max_seg, (pts[i] - pts[i - 1]).norm());
  if (max_seg >= 0.5) return false;  // segments too coarse for a wrapped test
  int cells = std::clamp(static_cast<int>(1.0 / std::max(2 * max_seg, 1e-3)), 4, 256);

  auto cell_of = [&](const Eigen::Vector2d& p) {
    int cx = static_cast<int>(wrap_unit(p.x()) * cells) % cells;
    int cy = static_cast<int>(wrap_unit(p.y()) * cells) % cells;
    return cx * cells + cy;
  };
  std::multimap<int, std::size_t> buckets;
  auto mid = [&](std::size_t seg) {
    return Eigen::Vector2d(0.5 * (pts[seg] + pts[seg + 1]));
  };
  for (std::size_t seg = 0; seg + 1 < m; ++seg) buckets.insert({cell_of(mid(seg)), seg});

  for (std::size_t seg = 0; seg + 1 < m; ++seg) {
    Eigen::Vector2d ma = mid(seg);
    int cx = static_cast<int>(wrap_unit(ma.x()) * cells) % cells;
    int cy = static_cast<int>(wrap_unit(ma.y()) * cells) % cells;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        int key = (((cx + dx) % cells + cells) % cells) * cells +
                  (((cy + dy) % cells + cells) % cells);
        auto range = buckets.equal_range(key);
        for (auto it = range.first; it != range.second; ++it) {
          std::size_t other = it->second;
          if (other <= seg + 1 && seg <= other + 1) continue;  // adjacent/self
          if (other < seg) continue;                            // test each pair once
          Eigen::Vector2d mb = mid(other);
          Eigen::Vector2d shift(std::round((ma.x() - mb.x())),
                                std::round((ma.y() - mb.y())));
          Eigen::Vector2d b0 = pts[other] + shift, b1 = pts[other + 1] + shift;
          if (segments_cross(pts[seg], pts[seg + 1], b0, b1)) return true;
        }
      }
    }
  }
  return false;
}

struct LiftView {
  const MapSpec* spec;
  bool backward;  // true for stable manifolds

  Eigen::Vector2d step(const Eigen::Vector2d& p) const {
    Vec v = backward ? apply_inverse_lift(*spec, Vec(p)) : apply_map_lift(*spec, Vec(p));
    return {v[0], v[1]};
  }
  TorusPoint unstep_wrapped(const TorusPoint& p) const {
    return backward ? apply_map(*spec, p) : apply_inverse(*spec, p);
  }
};

}  // namespace

Polyline grow_manifold(const MapSpec& spec, const ManifoldRequest& req,
                       const SplittingOptions& opts) {
  if (spec.dim() != 2) throw DomainError("grow_manifold: requires a 2-torus map");
  if (!(req.step > 0) || !(req.step < req.half_length))
    throw DomainError("grow_manifold: need 0 < step < half_length");
  if (req.half_length > 0.5)
    throw DomainError("grow_manifold: half_length must be <= 0.5 to stay local");
  if (req.depth < 1) throw DomainError("grow_manifold: depth must be >= 1");

  const bool stable = req.kind == ManifoldKind::stable;
  LiftView view{&spec, stable};

  CertifiedDirection at_base = stable
                                   ? stable_direction_certified(spec, req.base, opts)
                                   : unstable_direction_certified(spec, req.base, opts);
  if (!at_base.converged) {
    std::ostringstream msg;
    msg << "grow_manifold: splitting certificate failed at base (achieved "
        << at_base.certificate << ", tol " << opts.certificate_tol << ")";
    throw ManifoldError(msg.str());
  }

  // seed a tiny straight segment at the depth-preimage; iterating it forward
  // lands on the manifold through the base exponentially fast. The backward
  // orbit is stored so each generation can re-anchor its basepoint vertex:
  // forward fp drift grows like the expansion rate otherwise.
  std::vector<TorusPoint> orb(static_cast<std::size_t>(req.depth) + 1);
  orb[0] = req.base;
  for (int k = 1; k <= req.depth; ++k) orb[k] = view.unstep_wrapped(orb[k - 1]);
  const TorusPoint& q = orb[req.depth];
  Direction2 dir_q = stable ? stable_direction(spec, q, opts.depth)
                            : unstable_direction(spec, q, opts.depth);

  const double r0 = req.step / 4;
  LiftedCurve cur;
  for (int k = -2; k <= 2; ++k)
    cur.pts.push_back(Eigen::Vector2d(q.coords) + (k * r0 / 2) * dir_q.vec());
  cur.base = 2;

  const double cap = req.half_length * 1.15 + 4 * req.step;
  for (int g = 1; g <= req.depth; ++g) {
    auto cum = cur.arclengths();
    double ext = std::min(-cum.front(), cum.back());
    double h_tgt = std::max(std::min(req.step, ext / 3), 1e-7);
    double h_src = h_tgt / 3;
    // late generations carry their interpolation error into the output
    // (transverse error contracts under further iteration, fresh error does
    // not), so the source sampling is capped near the end
    if (req.depth - g < 6) h_src = std::min(h_src, 2e-5);
    h_src = std::max(h_src, 1e-7);

    for (int attempt = 0;; ++attempt) {
      LiftedCurve src = resample(cur, h_src, cap, h_src, cap);
      LiftedCurve img;
      img.pts.reserve(src.pts.size());
      for (const auto& p : src.pts) img.pts.push_back(view.step(p));
      img.base = src.base;
      if (max_turn_angle(img.pts) <= kMaxTurnAngle || attempt >= 4) {
        cur = std::move(img);
        break;
      }
      h_src /= 2;  // image bends too sharply; refine the source sampling
    }

    // snap the basepoint vertex to the stored orbit point and keep the lift
    // compact (large lift coordinates would bleed fp noise into the curve)
    const TorusPoint& anchor = orb[req.depth - g];
    Eigen::Vector2d bv = cur.pts[cur.base];
    Eigen::Vector2d delta(wrap_signed(anchor[0] - wrap_unit(bv.x())),
                          wrap_signed(anchor[1] - wrap_unit(bv.y())));
    Eigen::Vector2d target = bv + delta;
    Eigen::Vector2d shift(std::floor(target.x()), std::floor(target.y()));
    for (auto& p : cur.pts) p -= shift;
    cur.pts[cur.base] = Eigen::Vector2d(anchor[0], anchor[1]);
  }

  // exact output spacing: n steps of length L/n per branch, n = round(L/step)
  auto cum = cur.arclengths();
  double l_neg = std::min(req.half_length, -cum.front());
  double l_pos = std::min(req.half_length, cum.back());
  int n_neg = std::max(1, static_cast<int>(std::lround(l_neg / req.step)));
  int n_pos = std::max(1, static_cast<int>(std::lround(l_pos / req.step)));
  LiftedCurve out =
      resample(cur, l_neg / n_neg, l_neg * (1 + 1e-12), l_pos / n_pos, l_pos * (1 + 1e-12));

  // translate so the base vertex lies in the fundamental domain
  Eigen::Vector2d b = out.pts[out.base];
  Eigen::Vector2d shift(std::floor(b.x()), std::floor(b.y()));
  for (auto& p : out.pts) p -= shift;

  Polyline poly;
  poly.kind = req.kind;
  poly.base_index = out.base;
  poly.lift = std::move(out.pts);
  poly.arclength.resize(poly.lift.size());
  poly.arclength[0] = 0;
  for (std::size_t i = 1; i < poly.lift.size(); ++i)
    poly.arclength[i] =
        poly.arclength[i - 1] + (poly.lift[i] - poly.lift[i - 1]).norm();
  double off = poly.arclength[poly.base_index];
  for (double& t : poly.arclength) t -= off;

  if (poly.lift.size() >= 3 && poly.base_index > 0 &&
      poly.base_index + 1 < poly.lift.size()) {
    Eigen::Vector2d chord =
        poly.lift[poly.base_index + 1] - poly.lift[poly.base_index - 1];
    poly.tangent_defect_rad = angle_between(Direction2::of(chord), at_base.dir);
  }
  poly.self_intersection_warning = has_self_intersection(poly.lift);
  return poly;
}

Eigen::Vector2d lift_at_arclength(const Polyline& p, double t) {
  // chord re-parametrization can leave the extents a hair short of the
  // requested half-length; clamp within that slack
  if (t < p.arclength.front() - 1e-9 || t > p.arclength.back() + 1e-9)
    throw DomainError("point_at_arclength: t outside the grown range");
  t = std::clamp(t, p.arclength.front(), p.arclength.back());
  auto it = std::lower_bound(p.arclength.begin(), p.arclength.end(), t);
  if (it == p.arclength.begin()) return p.lift.front();
  if (it == p.arclength.end()) return p.lift.back();
  std::size_t hi = static_cast<std::size_t>(it - p.arclength.begin());
  if (p.arclength[hi] == t) return p.lift[hi];
  std::size_t lo = hi - 1;
  double span = p.arclength[hi] - p.arclength[lo];
  double w = span > 0 ? (t - p.arclength[lo]) / span : 0.0;
  return p.lift[lo] + w * (p.lift[hi] - p.lift[lo]);
}

TorusPoint point_at_arclength(const Polyline& p, double t) {
  return TorusPoint(Vec(lift_at_arclength(p, t)));
}

std::vector<FigureEntry> figure_field(const MapSpec& spec,
                                      const std::vector<TorusPoint>& bases,
                                      double half_length, double step, int depth,
                                      const SplittingOptions& opts) {
  if (bases.empty()) throw DomainError("figure_field: need at least one base");
  std::vector<FigureEntry> entries;
  for (std::size_t bi = 0; bi < bases.size(); ++bi) {
    for (ManifoldKind kind : {ManifoldKind::unstable, ManifoldKind::stable}) {
      FigureEntry e;
      e.base_index = bi;
      e.kind = kind;
      try {
        e.line = grow_manifold(spec, {bases[bi], kind, half_length, step, depth},
                               opts);
        e.ok = true;
      } catch (const Error& err) {
        e.ok = false;
        e.error = err.what();
      }
      entries.push_back(std::move(e));
    }
  }
  return entries;
}

namespace {

// split a lifted polyline at unit-cell boundaries; returns wrapped pieces
std::vector<std::vector<Eigen::Vector2d>> wrapped_pieces(
    const std::vector<Eigen::Vector2d>& lift) {
  std::vector<std::vector<Eigen::Vector2d>> pieces;
  if (lift.size() < 2) return pieces;
  std::vector<Eigen::Vector2d> piece;
  Eigen::Vector2d cell(std::floor(lift[0].x()), std::floor(lift[0].y()));
  piece.push_back(lift[0] - cell);
  for (std::size_t i = 1; i < lift.size(); ++i) {
    Eigen::Vector2d a = lift[i - 1], b = lift[i];
    // crossing parameters of integer gridlines along the segment
    std::vector<double> cuts;
    for (int axis = 0; axis < 2; ++axis) {
      double lo = std::min(a[axis], b[axis]), hi = std::max(a[axis], b[axis]);
      for (double line = std::ceil(lo); line <= hi; ++line) {
        double denom = b[axis] - a[axis];
        if (denom == 0) continue;
        double s = (line - a[axis]) / denom;
        if (s > 1e-12 && s < 1 - 1e-12) cuts.push_back(s);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    double prev = 0;
    for (double s : cuts) {
      Eigen::Vector2d p = a + s * (b - a);
      piece.push_back(p - cell);
      pieces.push_back(std::move(piece));
      piece.clear();
      Eigen::Vector2d after = a + (s + 1e-9) * (b - a);
      cell = Eigen::Vector2d(std::floor(after.x()), std::floor(after.y()));
      piece.push_back(p - cell);
      prev = s;
    }
    (void)prev;
    piece.push_back(b - cell);
  }
  if (piece.size() >= 2) pieces.push_back(std::move(piece));
  return pieces;
}

void append_csv_double(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

void write_figure_svg(std::ostream& os, const std::vector<FigureEntry>& entries) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"1\" height=\"1\" fill=\"white\"/>\n";
  for (const auto& e : entries) {
    if (!e.ok) continue;
    const char* color = e.kind == ManifoldKind::unstable ? "blue" : "red";
    for (const auto& piece : wrapped_pieces(e.line.lift)) {
      os << "<path fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"0.0035\" d=\"";
      for (std::size_t i = 0; i < piece.size(); ++i) {
        char buf[80];
        // SVG y axis points down; flip so the picture matches math coords
        std::snprintf(buf, sizeof(buf), "%c%.6f %.6f", i == 0 ? 'M' : 'L',
                      piece[i].x(), 1.0 - piece[i].y());
        os << buf << (i + 1 < piece.size() ? " " : "");
      }
      os << "\"/>\n";
    }
  }
  os << "</svg>\n";
}

void write_figure_csv(std::ostream& os, const std::vector<FigureEntry>& entries) {
  os << "base_index,kind,t,x,y\n";
  for (const auto& e : entries) {
    const char* kind = e.kind == ManifoldKind::unstable ? "unstable" : "stable";
    if (!e.ok) {
      os << "# base " << e.base_index << " " << kind << " failed: " << e.error
         << "\n";
      continue;
    }
    for (std::size_t i = 0; i < e.line.lift.size(); ++i) {
      os << e.base_index << "," << kind << ",";
      append_csv_double(os, e.line.arclength[i]);
      os << ",";
      append_csv_double(os, wrap_unit(e.line.lift[i].x()));
      os << ",";
      append_csv_double(os, wrap_unit(e.line.lift[i].y()));
      os << "\n";
    }
  }
}

}  // namespace anosovlab
