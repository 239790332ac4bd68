#include "tentlab/tent_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tentlab/error.hpp"
#include "tentlab/format.hpp"

namespace tentlab {

TentMap::TentMap(double slope) : t_(slope), c_(1.0 - 2.0 / slope) {
  if (!(slope > 1.0 && slope <= 2.0)) {
    throw DomainError("tent slope must lie in (1,2], got " + format_double(slope));
  }
}

double TentMap::operator()(double x) const {
  if (!(x >= -1.0 - kEndpointSlack && x <= 1.0 + kEndpointSlack)) {
    throw DomainError("tent map argument outside [-1,1]: " + format_double(x));
  }
  return apply(std::clamp(x, -1.0, 1.0));
}

std::vector<double> preimage_points(const TentMap& map, double v) {
  if (!(v >= -1.0 - kEndpointSlack && v <= 1.0 + kEndpointSlack)) {
    throw DomainError("preimage value outside [-1,1]: " + format_double(v));
  }
  v = std::clamp(v, -1.0, 1.0);
  const double right = std::clamp(map.right_inverse(v), -1.0, 1.0);
  if (v == 1.0) return {right};
  if (v < map.left_image() - kEndpointSlack) return {right};
  const double left = std::clamp(map.left_inverse(v), -1.0, 1.0);
  return {left, right};
}

namespace {

IntervalSet preimage_once(const TentMap& map, const IntervalSet& s) {
  std::vector<Interval> out;
  out.reserve(2 * s.size());
  const double floor_left = map.left_image();
  for (const auto& part : s.components()) {
    // Descending branch covers all of I.
    out.push_back({map.right_inverse(part.hi), map.right_inverse(part.lo)});
    // Ascending branch only reaches [3-2t, 1].
    double lo = std::max(part.lo, floor_left);
    double hi = part.hi;
    if (hi < lo - kEndpointSlack) continue;
    hi = std::max(hi, lo);
    out.push_back({map.left_inverse(lo), map.left_inverse(hi)});
  }
  return IntervalSet(std::move(out));
}

}  // namespace

IntervalSet preimage_set(const TentMap& map, const IntervalSet& s, int n) {
  if (n < 0) throw DomainError("preimage depth must be nonnegative");
  IntervalSet cur = s;
  for (int i = 0; i < n; ++i) cur = preimage_once(map, cur);
  return cur;
}

CriticalOrbit critical_orbit(const TentMap& map, int depth, double tol) {
  if (depth < 1) throw DomainError("critical orbit depth must be >= 1");
  if (!(tol > 0.0)) throw DomainError("critical orbit tolerance must be positive");
  CriticalOrbit orbit;
  orbit.points.reserve(static_cast<std::size_t>(depth) + 1);
  double x = map.critical_point();
  orbit.points.push_back(x);
  for (int j = 1; j <= depth; ++j) {
    x = map.apply(x);
    orbit.points.push_back(x);
    if (orbit.markov) continue;
    for (int i = 0; i < j; ++i) {
      if (std::abs(orbit.points[i] - x) <= tol) {
        orbit.markov = true;
        orbit.first_index = i;
        orbit.revisit_index = j;
        break;
      }
    }
  }
  return orbit;
}

DitheredOrbit::DitheredOrbit(const TentMap& map, double x0, std::uint64_t seed)
    : map_(map), x_(std::clamp(x0, -1.0, 1.0)), rng_(seed) {}

double DitheredOrbit::next() {
  const double jitter = (uniform01(rng_) - 0.5) * 0x1.0p-52;
  x_ = std::clamp(map_.apply(x_) + jitter, -1.0, 1.0);
  return x_;
}

}  // namespace tentlab
