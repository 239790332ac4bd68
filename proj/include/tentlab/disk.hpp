#pragma once

#include "tentlab/tent_map.hpp"

namespace tentlab {

/// Mapping-cylinder coordinates on the disk D: angle y on the boundary circle
/// and depth s in [0,1]. The slice s = 1 is the interval I, where (y,1) and
/// (-y,1) name the same point cos y.
struct CylinderPoint {
  double y = 0.0;
  double s = 0.0;
};

struct PlanePoint {
  double u = 0.0;
  double v = 0.0;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// s-coordinates within this distance of 1 count as lying on I.
inline constexpr double kOnIntervalSlack = 1e-12;

inline bool on_interval(const CylinderPoint& p) { return p.s >= 1.0 - kOnIntervalSlack; }

/// Angle in (-pi, pi].
double wrap_angle(double y);

/// Canonical form: y in (-pi, pi] off I, y in [0, pi] on I (with s = 1).
CylinderPoint canonical(CylinderPoint p);

/// The point of I with value x, as (arccos x, 1).
CylinderPoint interval_point(double x);

/// Embedding (y,s) -> ((2-s) cos y, 2(1-s) sin y). Level sets of s are nested
/// ellipses from the radius-2 circle (s = 0) down to the slit I (s = 1).
PlanePoint eta(const CylinderPoint& p);

/// Inverse chart. Points on the slit (-1,1) x {0} return s = 1 with
/// y in [0, pi]. Throws DomainError outside the closed radius-2 disk.
CylinderPoint eta_inverse(const PlanePoint& q);

double plane_distance(const CylinderPoint& a, const CylinderPoint& b);

/// Collapse map: (y, 2s) on s <= 1/2, (y, 1) on s >= 1/2.
CylinderPoint upsilon(const CylinderPoint& p);

/// Angle whose cosine is f_t(x), taken on the upper arc for x <= c and the
/// lower arc for x >= c, so the result decreases strictly from
/// arccos(3 - 2t) at x = -1 to -pi at x = 1.
double gamma_angle(const TentMap& map, double x);

/// Unwrapping of f_t on D. Identity on the collar s <= 3/4; for s in
/// [3/4, 1] the image moves along the plane segment from eta(y, 3/4) to
/// eta(gamma(cos y), 1/2), reaching (gamma(cos y), 1/2) at s = 1.
CylinderPoint unwrap(const TentMap& map, const CylinderPoint& p);

/// H_t = upsilon o unwrap.
CylinderPoint h_step(const TentMap& map, const CylinderPoint& p);

}  // namespace tentlab
