#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "tailatlas/errors.hpp"

namespace tailatlas {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

/// Billiard domain kinds. Plane tiles the whole plane by a rank-2 lattice
/// and the displacement has two components. Tube is periodic along x with
/// the transverse coordinate wrapped on a circle of circumference `width`;
/// only x enters the displacement. HardwallTube replaces the wrapping by
/// mirror walls at y = +-width/2; wall bounces fold a flight in the middle
/// but do not count as collisions and never change the cell index.
enum class GeometryKind { Plane, Tube, HardwallTube };

inline std::string to_string(GeometryKind k) {
  switch (k) {
    case GeometryKind::Plane: return "plane";
    case GeometryKind::Tube: return "tube";
    case GeometryKind::HardwallTube: return "hardwall-tube";
  }
  return "plane";
}

/// One disk per lattice cell; `center` is expressed in the frame of the
/// disk's home cell. In wall geometries the y coordinate is absolute and a
/// center may sit exactly on a wall, exposing a half-disk bump.
struct Scatterer {
  Vec2 center;
  double radius = 0.0;
};

struct LorentzConfig {
  GeometryKind kind = GeometryKind::Plane;
  // Lattice basis vectors for Plane; cell j maps to j0*basis[0]+j1*basis[1].
  // Tube kinds ignore this and use the unit spacing along x.
  std::array<Vec2, 2> basis{{{1.0, 0.0}, {0.0, 1.0}}};
  double width = 1.0;  // transverse circumference (Tube) or wall gap
  std::vector<Scatterer> scatterers;
  int horizon_cells = 100;       // free-flight search bound, in cells
  double tangency_tol = 1e-12;   // tangent / grazing rejection threshold
  double reversal_tol = 1e-6;    // retrace comparison tolerance
};

/// Number of displacement components tracked by the cocycle.
inline int displacement_dim(GeometryKind k) {
  return k == GeometryKind::Plane ? 2 : 1;
}

namespace detail {

/// Lattice frame data shared by the flight routines. `b` maps lattice to
/// physical coordinates, `binv` inverts it. Tube kinds use diag(1, width);
/// wall geometries keep the lattice action on x only.
struct LatticeFrame {
  double b[2][2];
  double binv[2][2];
  bool walls = false;
  double half_width = 0.0;

  Vec2 to_physical(double jx, double jy) const {
    return {b[0][0] * jx + b[0][1] * jy, b[1][0] * jx + b[1][1] * jy};
  }
  Vec2 to_lattice(Vec2 q) const {
    return {binv[0][0] * q.x + binv[0][1] * q.y,
            binv[1][0] * q.x + binv[1][1] * q.y};
  }
};

inline LatticeFrame make_frame(const LorentzConfig& cfg) {
  LatticeFrame f;
  if (cfg.kind == GeometryKind::Plane) {
    f.b[0][0] = cfg.basis[0].x;
    f.b[1][0] = cfg.basis[0].y;
    f.b[0][1] = cfg.basis[1].x;
    f.b[1][1] = cfg.basis[1].y;
  } else {
    f.b[0][0] = 1.0;
    f.b[1][0] = 0.0;
    f.b[0][1] = 0.0;
    f.b[1][1] = cfg.width;
  }
  double det = f.b[0][0] * f.b[1][1] - f.b[0][1] * f.b[1][0];
  if (std::fabs(det) < 1e-12)
    throw Error(ErrorKind::InvalidInput, "lattice basis is singular");
  f.binv[0][0] = f.b[1][1] / det;
  f.binv[0][1] = -f.b[0][1] / det;
  f.binv[1][0] = -f.b[1][0] / det;
  f.binv[1][1] = f.b[0][0] / det;
  f.walls = cfg.kind == GeometryKind::HardwallTube;
  f.half_width = cfg.width / 2.0;
  return f;
}

}  // namespace detail

/// Structural validation of a billiard table. Throws InvalidInput with the
/// offending scatterer indices; disjointness is checked against every
/// periodic copy within the horizon neighborhood.
inline void validate_geometry(const LorentzConfig& cfg) {
  if (cfg.scatterers.empty())
    throw Error(ErrorKind::InvalidInput, "no scatterers given");
  if (cfg.horizon_cells < 1)
    throw Error(ErrorKind::InvalidInput, "horizon_cells must be at least 1");
  if (cfg.tangency_tol <= 0.0 || cfg.reversal_tol <= 0.0)
    throw Error(ErrorKind::InvalidInput, "tolerances must be positive");
  if (cfg.kind != GeometryKind::Plane && cfg.width <= 0.0)
    throw Error(ErrorKind::InvalidInput, "tube width must be positive");

  const detail::LatticeFrame f = detail::make_frame(cfg);
  const double hw = f.half_width;

  for (std::size_t i = 0; i < cfg.scatterers.size(); ++i) {
    const Scatterer& s = cfg.scatterers[i];
    if (!(s.radius > 0.0))
      throw Error(ErrorKind::InvalidInput,
                  "scatterer " + std::to_string(i) + " has nonpositive radius");
    // The flight search only consults disks homed within one cell of the
    // cells a ray visits, so every disk must fit inside that ring.
    Vec2 u = f.to_lattice(s.center);
    double rx = std::hypot(f.binv[0][0], f.binv[0][1]) * s.radius;
    double ry = std::hypot(f.binv[1][0], f.binv[1][1]) * s.radius;
    bool in_ring = std::fabs(u.x) + rx <= 1.45;
    if (!f.walls) in_ring = in_ring && std::fabs(u.y) + ry <= 1.45;
    if (!in_ring)
      throw Error(ErrorKind::InvalidInput,
                  "scatterer " + std::to_string(i) +
                      " extends beyond the adjacent-cell search ring");
    if (cfg.kind == GeometryKind::Tube && 2.0 * s.radius >= cfg.width)
      throw Error(ErrorKind::InvalidInput,
                  "scatterer " + std::to_string(i) +
                      " does not fit within the tube width");
    if (f.walls) {
      bool interior = std::fabs(s.center.y) + s.radius < hw;
      bool on_wall =
          std::fabs(std::fabs(s.center.y) - hw) < 1e-12 && s.radius < cfg.width;
      if (!interior && !on_wall)
        throw Error(ErrorKind::InvalidInput,
                    "scatterer " + std::to_string(i) + " crosses a wall");
    }
  }

  const long long h = cfg.horizon_cells;
  for (std::size_t i = 0; i < cfg.scatterers.size(); ++i)
    for (std::size_t j = i; j < cfg.scatterers.size(); ++j)
      for (long long ax = -h; ax <= h; ++ax) {
        const long long bylim = f.walls ? 0 : h;
        for (long long ay = -bylim; ay <= bylim; ++ay) {
          if (i == j && ax == 0 && ay == 0) continue;
          Vec2 off = f.to_physical(static_cast<double>(ax),
                                   static_cast<double>(ay));
          double gap = norm(cfg.scatterers[i].center + off -
                            cfg.scatterers[j].center);
          if (gap <= cfg.scatterers[i].radius + cfg.scatterers[j].radius)
            throw Error(ErrorKind::InvalidInput,
                        "scatterers " + std::to_string(i) + " and " +
                            std::to_string(j) + " overlap at cell offset (" +
                            std::to_string(ax) + ", " + std::to_string(ay) +
                            ")");
        }
      }
}

/// Shipped tables. finite-horizon-square and finite-horizon-tube block every
/// free-flight corridor with a second disk; square-r04 is the single-disk
/// table whose axis corridors stay open, so horizon escapes are expected
/// there; hardwall-tube mixes an interior disk with a wall-centered bump and
/// keeps a corridor open along the top wall.
inline LorentzConfig make_lorentz_preset(const std::string& name) {
  LorentzConfig cfg;
  if (name == "finite-horizon-square") {
    cfg.kind = GeometryKind::Plane;
    cfg.scatterers = {{{0.5, 0.5}, 0.45}, {{0.0, 0.0}, 0.2}};
  } else if (name == "square-r04") {
    cfg.kind = GeometryKind::Plane;
    cfg.scatterers = {{{0.0, 0.0}, 0.4}};
  } else if (name == "finite-horizon-tube") {
    cfg.kind = GeometryKind::Tube;
    cfg.width = 1.0;
    cfg.scatterers = {{{0.5, 0.5}, 0.42}, {{0.0, 0.0}, 0.25}};
  } else if (name == "hardwall-tube") {
    cfg.kind = GeometryKind::HardwallTube;
    cfg.width = 1.0;
    cfg.scatterers = {{{0.5, 0.0}, 0.42}, {{0.0, -0.5}, 0.25}};
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown preset '" + name + "'");
  }
  return cfg;
}

inline std::vector<std::string> lorentz_preset_names() {
  return {"finite-horizon-square", "square-r04", "finite-horizon-tube",
          "hardwall-tube"};
}

/// Outcome of one free flight, in the frame of the launch point. `cell` is
/// the home cell of the scatterer copy that was hit, so it doubles as the
/// per-flight displacement when the launch frame sits at the previous home
/// cell. `local` subtracts that cell's origin from the hit point.
struct FlightHit {
  int scatterer = -1;
  std::array<long long, 2> cell{{0, 0}};
  Vec2 point;
  Vec2 local;
  double time = 0.0;
  long long wall_bounces = 0;
  Vec2 v_arrive;
};

namespace detail {

// Rejects roots this close to the launch; the launch disk itself is excluded
// exactly, so this only guards against reflected rays re-touching a surface
// they numerically start on.
constexpr double kMinFlightTime = 1e-9;
constexpr long long kMaxWallBounces = 1000000;

struct CandidateHit {
  double time = std::numeric_limits<double>::infinity();
  int scatterer = -1;
  std::array<long long, 2> cell{{0, 0}};
  double miss = std::numeric_limits<double>::infinity();
};

/// Exact ray-circle test for one disk copy. Updates `best` when the first
/// root beats it; records how far the ray's closest approach sits from the
/// circle, which drives the tangency rejection.
inline void test_disk(Vec2 p, Vec2 v, Vec2 center, double radius,
                      long long cx, long long cy, int sid, double t_cap,
                      CandidateHit& best) {
  Vec2 d = p - center;
  double a = dot(v, v);
  double b = dot(d, v);
  double c = dot(d, d) - radius * radius;
  double disc = b * b - a * c;
  if (disc <= 0.0) return;
  double sq = std::sqrt(disc);
  double t = (-b - sq) / a;
  if (t <= kMinFlightTime) t = (-b + sq) / a;
  if (t <= kMinFlightTime || t > t_cap || t >= best.time) return;
  best.time = t;
  best.scatterer = sid;
  best.cell = {cx, cy};
  double perp2 = std::max(dot(d, d) - b * b / a, 0.0);
  best.miss = std::fabs(std::sqrt(perp2) - radius);
}

}  // namespace detail

/// First scatterer intersection of the ray q + t v, t > 0, against every
/// periodic disk copy within the horizon neighborhood. Wall geometries fold
/// the ray at the mirrors in passing. The launch disk copy may be excluded;
/// a straight ray leaving a disk outward can never re-enter it, so the
/// exclusion is exact (and is dropped after the first wall bounce, where a
/// return to the launch disk becomes legitimate).
///
/// Errors: HorizonEscape when no surface is met within horizon_cells;
/// Tangency when the winning hit grazes its disk within tangency_tol.
inline FlightHit next_collision(Vec2 q, Vec2 v, const LorentzConfig& cfg,
                                int exclude_scatterer = -1,
                                std::array<long long, 2> exclude_cell = {
                                    {0, 0}}) {
  const detail::LatticeFrame f = detail::make_frame(cfg);
  const long long horizon = cfg.horizon_cells;
  const int nscat = static_cast<int>(cfg.scatterers.size());
  const double inf = std::numeric_limits<double>::infinity();

  Vec2 u_start = f.to_lattice(q);
  const long long origin_x =
      static_cast<long long>(std::floor(u_start.x + 0.5));
  const long long origin_y =
      static_cast<long long>(std::floor(u_start.y + 0.5));

  Vec2 p = q;        // current segment launch point
  Vec2 w = v;        // current segment direction
  double t_acc = 0;  // flight time spent in earlier wall segments
  long long bounces = 0;

  while (true) {
    // Wall geometries cap the segment at the facing mirror.
    double t_wall = inf;
    if (f.walls && w.y != 0.0) {
      double target = w.y > 0.0 ? f.half_width : -f.half_width;
      t_wall = (target - p.y) / w.y;
    }

    detail::CandidateHit best;
    Vec2 u0 = f.to_lattice(p);
    Vec2 vu = f.to_lattice(w);
    long long dx = static_cast<long long>(std::floor(u0.x + 0.5));
    long long dy = static_cast<long long>(std::floor(u0.y + 0.5));
    const bool scan_y = !f.walls;

    long long step_x = vu.x > 0.0 ? 1 : -1;
    long long step_y = vu.y > 0.0 ? 1 : -1;
    double tnext_x =
        vu.x != 0.0 ? (dx + 0.5 * step_x - u0.x) / vu.x : inf;
    double tnext_y = scan_y && vu.y != 0.0
                         ? (dy + 0.5 * step_y - u0.y) / vu.y
                         : inf;
    double tdelta_x = vu.x != 0.0 ? 1.0 / std::fabs(vu.x) : inf;
    double tdelta_y = vu.y != 0.0 ? 1.0 / std::fabs(vu.y) : inf;

    while (true) {
      for (long long ex = -1; ex <= 1; ++ex)
        for (long long ey = scan_y ? -1 : 0; ey <= (scan_y ? 1 : 0); ++ey) {
          long long cx = dx + ex;
          long long cy = scan_y ? dy + ey : 0;
          Vec2 off = f.to_physical(static_cast<double>(cx),
                                   static_cast<double>(cy));
          for (int s = 0; s < nscat; ++s) {
            if (bounces == 0 && s == exclude_scatterer &&
                cx == exclude_cell[0] && cy == exclude_cell[1])
              continue;
            detail::test_disk(p, w, cfg.scatterers[s].center + off,
                              cfg.scatterers[s].radius, cx, cy, s, t_wall,
                              best);
          }
        }

      double t_exit = std::min(tnext_x, tnext_y);
      if (best.time <= t_exit || t_exit > t_wall) break;
      if (tnext_x <= t_exit) {
        dx += step_x;
        tnext_x += tdelta_x;
      }
      if (tnext_y <= t_exit) {
        dy += step_y;
        tnext_y += tdelta_y;
      }
      if (std::max(std::llabs(dx - origin_x),
                   scan_y ? std::llabs(dy - origin_y) : 0) > horizon) {
        if (best.scatterer >= 0) break;
        throw Error(ErrorKind::HorizonEscape,
                    "no scatterer within " + std::to_string(horizon) +
                        " cells of the flight start");
      }
    }

    if (best.scatterer >= 0) {
      if (best.miss < cfg.tangency_tol)
        throw Error(ErrorKind::Tangency,
                    "flight grazes scatterer " +
                        std::to_string(best.scatterer) +
                        " within the tangency tolerance");
      FlightHit hit;
      hit.scatterer = best.scatterer;
      hit.cell = best.cell;
      hit.point = p + best.time * w;
      Vec2 off = f.to_physical(static_cast<double>(best.cell[0]),
                               static_cast<double>(best.cell[1]));
      hit.local = hit.point - off;
      hit.time = t_acc + best.time;
      hit.wall_bounces = bounces;
      hit.v_arrive = w;
      return hit;
    }

    if (!f.walls || t_wall == inf)
      throw Error(ErrorKind::HorizonEscape,
                  "no scatterer within " + std::to_string(horizon) +
                      " cells of the flight start");

    // Fold at the mirror and keep flying.
    p = p + t_wall * w;
    p.y = w.y > 0.0 ? f.half_width : -f.half_width;
    w.y = -w.y;
    t_acc += t_wall;
    if (++bounces > detail::kMaxWallBounces)
      throw Error(ErrorKind::HorizonEscape,
                  "wall bounce budget exhausted without a collision");
  }
}

/// Specular reflection v' = v - 2 (v.n) n for an incoming v (v.n <= 0).
/// Throws Grazing when the normal component is below the tolerance; such
/// reflections sit in the singular set and callers resample instead.
inline Vec2 reflect(Vec2 v, Vec2 n, double grazing_tol = 1e-12) {
  double vn = dot(v, n);
  if (std::fabs(vn) < grazing_tol)
    throw Error(ErrorKind::Grazing,
                "normal velocity component " + std::to_string(vn) +
                    " is below the tolerance");
  return v - (2.0 * vn) * n;
}

/// Post-collision state: a boundary point of scatterer copy (scatterer,
/// cell) given by the angle theta, with outgoing unit velocity v. In wall
/// geometries cell[1] is always 0 and y coordinates are absolute.
struct LineElement {
  int scatterer = 0;
  std::array<long long, 2> cell{{0, 0}};
  double theta = 0.0;
  Vec2 v{1.0, 0.0};
};

/// Boundary point of the element in the frame of its own cell.
inline Vec2 element_point(const LineElement& le, const LorentzConfig& cfg) {
  const Scatterer& s = cfg.scatterers[le.scatterer];
  return {s.center.x + s.radius * std::cos(le.theta),
          s.center.y + s.radius * std::sin(le.theta)};
}

/// Outward unit normal at the element's boundary point.
inline Vec2 element_normal(const LineElement& le) {
  return {std::cos(le.theta), std::sin(le.theta)};
}

/// One collision-to-collision application of the billiard map: free flight,
/// then specular reflection at the next scatterer. The displacement is the
/// integer home-cell change of the scatterer, maintained exactly through
/// the cell walk rather than recovered from float positions.
struct CollisionEvent {
  LineElement from;
  LineElement to;
  double flight_time = 0.0;
  std::array<long long, 2> displacement{{0, 0}};
  Vec2 v_incoming;  // arrival velocity before reflection, for retracing
  long long wall_bounces = 0;
};

inline CollisionEvent billiard_step(const LineElement& from,
                                    const LorentzConfig& cfg) {
  Vec2 q = element_point(from, cfg);
  FlightHit hit = next_collision(q, from.v, cfg, from.scatterer, {{0, 0}});
  const Scatterer& s = cfg.scatterers[hit.scatterer];

  // Normalize against the actual radial length; the hit point carries the
  // quadratic root's rounding, and dividing by the nominal radius would let
  // that error leak into |n| and from there into the running speed.
  Vec2 radial = hit.local - s.center;
  Vec2 n = (1.0 / norm(radial)) * radial;
  Vec2 v_out = reflect(hit.v_arrive, n, cfg.tangency_tol);

  CollisionEvent ev;
  ev.from = from;
  ev.to.scatterer = hit.scatterer;
  ev.to.cell = {from.cell[0] + hit.cell[0],
                cfg.kind == GeometryKind::Plane ? from.cell[1] + hit.cell[1]
                                                : 0};
  double theta = std::atan2(radial.y, radial.x);
  if (theta < 0.0) theta += 2.0 * kPi;
  ev.to.theta = theta;
  ev.to.v = v_out;
  ev.flight_time = hit.time;
  ev.displacement = {hit.cell[0],
                     cfg.kind == GeometryKind::Plane ? hit.cell[1] : 0};
  ev.v_incoming = hit.v_arrive;
  ev.wall_bounces = hit.wall_bounces;
  return ev;
}

}  // namespace tailatlas
