#include "mono3d/box3d.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "mono3d/error.hpp"
#include "mono3d/rotation.hpp"

namespace mono3d {

void OrientedBox3D::validate() const {
  if (!center.allFinite()) throw Error(ErrorKind::InvalidBox, "non-finite center");
  if (!dims.allFinite() || (dims.array() <= 0.0).any()) {
    throw Error(ErrorKind::InvalidBox, "dimensions must be finite and > 0");
  }
  require_rotation(rot, "box rotation");
}

std::array<Point3D, 8> corners(const OrientedBox3D& b) {
  std::array<Point3D, 8> out;
  const Vec3 half = 0.5 * b.dims;
  for (int i = 0; i < 8; ++i) {
    const Vec3 local((i & 1) ? half.x() : -half.x(), (i & 2) ? half.y() : -half.y(), (i & 4) ? half.z() : -half.z());
    out[i] = b.center + b.rot * local;
  }
  return out;
}

bool contains(const OrientedBox3D& b, const Point3D& p) {
  const Vec3 local = b.rot.transpose() * (p - b.center);
  return std::abs(local.x()) <= 0.5 * b.dims.x() && std::abs(local.y()) <= 0.5 * b.dims.y() &&
         std::abs(local.z()) <= 0.5 * b.dims.z();
}

// ---------------------------------------------------------------------------
// Convex polytope clipping

double ConvexPolytope::volume() const {
  if (empty()) return 0.0;
  Vec3 c = Vec3::Zero();
  for (const auto& v : vertices) c += v;
  c /= static_cast<double>(vertices.size());
  double vol = 0.0;
  for (const auto& f : faces) {
    const Vec3 p0 = vertices[f[0]] - c;
    for (std::size_t k = 1; k + 1 < f.size(); ++k) {
      vol += p0.dot((vertices[f[k]] - c).cross(vertices[f[k + 1]] - c));
    }
  }
  return vol / 6.0;
}

ConvexPolytope ConvexPolytope::from_box(const OrientedBox3D& b) {
  ConvexPolytope p;
  const auto cs = corners(b);
  p.vertices.assign(cs.begin(), cs.end());
  // Counter-clockwise seen from outside for the bit layout of corners().
  p.faces = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
  return p;
}

ConvexPolytope ConvexPolytope::clip(const Vec3& normal, double offset, double tol) const {
  if (empty()) return {};
  const std::size_t m = vertices.size();
  std::vector<double> dist(m);
  bool any_outside = false;
  bool any_inside = false;
  for (std::size_t i = 0; i < m; ++i) {
    dist[i] = normal.dot(vertices[i]) - offset;
    any_outside |= dist[i] > tol;
    any_inside |= dist[i] < -tol;
  }
  if (!any_outside) return *this;
  if (!any_inside) return {};

  ConvexPolytope out;
  std::vector<int> remap(m, -1);
  std::vector<bool> on_plane;
  for (std::size_t i = 0; i < m; ++i) {
    if (dist[i] <= tol) {
      remap[i] = static_cast<int>(out.vertices.size());
      out.vertices.push_back(vertices[i]);
      on_plane.push_back(std::abs(dist[i]) <= tol);
    }
  }

  std::map<std::pair<int, int>, int> cuts;
  auto cut = [&](int i, int j) {
    const auto key = std::minmax(i, j);
    if (auto it = cuts.find(key); it != cuts.end()) return it->second;
    const double t = dist[i] / (dist[i] - dist[j]);
    const int idx = static_cast<int>(out.vertices.size());
    out.vertices.push_back(vertices[i] + t * (vertices[j] - vertices[i]));
    on_plane.push_back(true);
    cuts.emplace(key, idx);
    return idx;
  };

  bool has_planar_face = false;
  for (const auto& f : faces) {
    std::vector<int> cycle;
    const std::size_t n = f.size();
    for (std::size_t k = 0; k < n; ++k) {
      const int i = f[k];
      const int j = f[(k + 1) % n];
      if (dist[i] <= tol) cycle.push_back(remap[i]);
      const bool crosses = (dist[i] < -tol && dist[j] > tol) || (dist[i] > tol && dist[j] < -tol);
      if (crosses) cycle.push_back(cut(i, j));
    }
    if (cycle.size() < 3) continue;
    has_planar_face |= std::all_of(cycle.begin(), cycle.end(), [&](int v) { return on_plane[v]; });
    out.faces.push_back(std::move(cycle));
  }

  if (!has_planar_face) {
    std::vector<int> cap;
    for (const auto& f : out.faces) {
      for (int v : f) {
        if (on_plane[v] && std::find(cap.begin(), cap.end(), v) == cap.end()) cap.push_back(v);
      }
    }
    if (cap.size() >= 3) {
      Vec3 c = Vec3::Zero();
      for (int v : cap) c += out.vertices[v];
      c /= static_cast<double>(cap.size());
      const Vec3 u = normal.unitOrthogonal();
      const Vec3 w = normal.normalized().cross(u);
      std::vector<std::pair<double, int>> order;
      order.reserve(cap.size());
      for (int v : cap) {
        const Vec3 r = out.vertices[v] - c;
        order.emplace_back(std::atan2(r.dot(w), r.dot(u)), v);
      }
      std::sort(order.begin(), order.end());
      std::vector<int> cycle;
      for (const auto& [angle, v] : order) cycle.push_back(v);
      out.faces.push_back(std::move(cycle));
    }
  }
  if (out.faces.size() < 4) return {};
  return out;
}

std::array<std::pair<Vec3, double>, 6> half_spaces(const OrientedBox3D& b) {
  std::array<std::pair<Vec3, double>, 6> hs;
  for (int k = 0; k < 3; ++k) {
    const Vec3 axis = b.rot.col(k);
    const double c = axis.dot(b.center);
    const double e = 0.5 * b.dims[k];
    hs[2 * k] = {axis, c + e};
    hs[2 * k + 1] = {-axis, -c + e};
  }
  return hs;
}

double intersection_volume(const OrientedBox3D& a, const OrientedBox3D& b) {
  ConvexPolytope poly = ConvexPolytope::from_box(a);
  for (const auto& [normal, offset] : half_spaces(b)) {
    poly = poly.clip(normal, offset);
    if (poly.empty()) return 0.0;
  }
  return std::max(0.0, poly.volume());
}

double iou3d(const OrientedBox3D& a, const OrientedBox3D& b) {
  const double inter = intersection_volume(a, b);
  const double uni = a.volume() + b.volume() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Yaw-only fast path

bool is_yaw_only(const Mat3& R, double tol) {
  return std::abs(R(2, 0)) <= tol && std::abs(R(2, 1)) <= tol && std::abs(R(0, 2)) <= tol &&
         std::abs(R(1, 2)) <= tol;
}

namespace {

using Polygon = std::vector<Eigen::Vector2d>;

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const Polygon& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) s += cross2(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * s;
}

Polygon footprint(const OrientedBox3D& b) {
  const auto cs = corners(b);
  Polygon poly;
  for (int i : {0, 1, 3, 2}) poly.emplace_back(cs[i].x(), cs[i].y());
  if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

// Sutherland-Hodgman; both polygons convex and counter-clockwise.
Polygon clip_polygon(Polygon subject, const Polygon& clipper) {
  for (std::size_t e = 0; e < clipper.size() && !subject.empty(); ++e) {
    const Eigen::Vector2d a = clipper[e];
    const Eigen::Vector2d edge = clipper[(e + 1) % clipper.size()] - a;
    auto side = [&](const Eigen::Vector2d& p) { return cross2(edge, p - a); };
    Polygon next;
    for (std::size_t i = 0; i < subject.size(); ++i) {
      const Eigen::Vector2d& p = subject[i];
      const Eigen::Vector2d& q = subject[(i + 1) % subject.size()];
      const double sp = side(p);
      const double sq = side(q);
      if (sp >= 0.0) next.push_back(p);
      if ((sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0)) next.push_back(p + (sp / (sp - sq)) * (q - p));
    }
    subject = std::move(next);
  }
  return subject;
}

}  // namespace

double iou3d_bev_yaw(const OrientedBox3D& a, const OrientedBox3D& b) {
  if (!is_yaw_only(a.rot) || !is_yaw_only(b.rot)) {
    throw Error(ErrorKind::NotYawOnly, "box rotation has pitch or roll components");
  }
  const Polygon overlap = clip_polygon(footprint(a), footprint(b));
  const double area = overlap.size() >= 3 ? std::abs(signed_area(overlap)) : 0.0;
  const double lo = std::max(a.center.z() - 0.5 * a.dims.z(), b.center.z() - 0.5 * b.dims.z());
  const double hi = std::min(a.center.z() + 0.5 * a.dims.z(), b.center.z() + 0.5 * b.dims.z());
  const double inter = area * std::max(0.0, hi - lo);
  const double uni = a.volume() + b.volume() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

double iou3d_monte_carlo(const OrientedBox3D& a, const OrientedBox3D& b, std::uint64_t samples, std::uint64_t seed) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto* box : {&a, &b}) {
    for (const auto& c : corners(*box)) {
      lo = lo.cwiseMin(c);
      hi = hi.cwiseMax(c);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo.x(), hi.x());
  std::uniform_real_distribution<double> uy(lo.y(), hi.y());
  std::uniform_real_distribution<double> uz(lo.z(), hi.z());
  std::uint64_t in_a = 0, in_b = 0, in_both = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const Point3D p(ux(rng), uy(rng), uz(rng));
    const bool ia = contains(a, p);
    const bool ib = contains(b, p);
    in_a += ia;
    in_b += ib;
    in_both += ia && ib;
  }
  const std::uint64_t uni = in_a + in_b - in_both;
  return uni == 0 ? 0.0 : static_cast<double>(in_both) / static_cast<double>(uni);
}

}  // namespace mono3d
