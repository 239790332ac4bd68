#include "tentlab/disk.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tentlab/error.hpp"
#include "tentlab/format.hpp"

namespace tentlab {

double wrap_angle(double y) {
  double r = std::remainder(y, kTwoPi);  // in [-pi, pi]
  if (r <= -kPi) r += kTwoPi;
  return r;
}

CylinderPoint canonical(CylinderPoint p) {
  if (on_interval(p)) return interval_point(std::cos(p.y));
  return {wrap_angle(p.y), std::max(p.s, 0.0)};
}

CylinderPoint interval_point(double x) { return {std::acos(std::clamp(x, -1.0, 1.0)), 1.0}; }

PlanePoint eta(const CylinderPoint& p) {
  return {(2.0 - p.s) * std::cos(p.y), 2.0 * (1.0 - p.s) * std::sin(p.y)};
}

CylinderPoint eta_inverse(const PlanePoint& q) {
  const double r2 = q.u * q.u + q.v * q.v;
  if (r2 > 4.0 * (1.0 + 1e-9)) {
    throw DomainError("plane point outside the radius-2 disk: (" + format_double(q.u) + ", " +
                      format_double(q.v) + ")");
  }
  if (q.v == 0.0) {
    const double au = std::abs(q.u);
    if (au <= 1.0) return interval_point(q.u);
    const double s = std::clamp(2.0 - au, 0.0, 1.0);
    return {q.u > 0.0 ? 0.0 : kPi, s};
  }
  // With d = 1 - s the level-set equation u^2/(1+d)^2 + v^2/(4d^2) = 1 has a
  // strictly decreasing left side on (0,1]; bisect on d so precision is
  // relative near the slit.
  auto level = [&](double d) {
    const double a = q.u / (1.0 + d);
    const double b = q.v / (2.0 * d);
    return a * a + b * b;
  };
  double lo = 0.0;
  double hi = 1.0;
  if (level(hi) >= 1.0) {
    lo = hi;  // on or just outside the boundary circle
  } else {
    for (int it = 0; it < 2200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (level(mid) > 1.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }
  const double d = 0.5 * (lo + hi);
  const double y = std::atan2(q.v / (2.0 * d), q.u / (1.0 + d));
  return {wrap_angle(y), 1.0 - d};
}

double plane_distance(const CylinderPoint& a, const CylinderPoint& b) {
  const PlanePoint p = eta(a);
  const PlanePoint q = eta(b);
  return std::hypot(p.u - q.u, p.v - q.v);
}

CylinderPoint upsilon(const CylinderPoint& p) {
  if (p.s < 0.5) return {p.y, 2.0 * p.s};
  return {p.y, 1.0};
}

double gamma_angle(const TentMap& map, double x) {
  const double a = std::acos(std::clamp(map.apply(x), -1.0, 1.0));
  return x <= map.critical_point() ? a : -a;
}

CylinderPoint unwrap(const TentMap& map, const CylinderPoint& p) {
  if (p.s <= 0.75) return p;
  const double x = std::cos(p.y);
  const double target_angle = gamma_angle(map, x);
  if (p.s >= 1.0) return {target_angle, 0.5};
  const double lambda = 4.0 * (p.s - 0.75);
  const PlanePoint from = eta({p.y, 0.75});
  const PlanePoint to = eta({target_angle, 0.5});
  const PlanePoint mix{(1.0 - lambda) * from.u + lambda * to.u, (1.0 - lambda) * from.v + lambda * to.v};
  CylinderPoint out = eta_inverse(mix);
  // The filled s = 1/2 ellipse is convex, so the segment never drops below it.
  out.s = std::max(out.s, 0.5);
  return out;
}

CylinderPoint h_step(const TentMap& map, const CylinderPoint& p) {
  if (p.s < 0.5) return {p.y, 2.0 * p.s};
  if (p.s <= 0.75) return interval_point(std::cos(p.y));
  const CylinderPoint q = unwrap(map, p);
  // upsilon sends all of s >= 1/2 to the I-point (q.y, 1).
  return interval_point(std::cos(q.y));
}

}  // namespace tentlab
