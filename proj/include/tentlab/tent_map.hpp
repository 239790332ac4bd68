#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tentlab/interval_set.hpp"

namespace tentlab {

/// Slack used when comparing computed values against I = [-1,1] and against
/// branch boundaries.
inline constexpr double kEndpointSlack = 1e-12;

/// Core tent map of slope t in (1,2], rescaled to I = [-1,1]:
///   f(x) = min(t(x-1)+3, t(1-x)-1)
/// with critical point c = 1 - 2/t, f(c) = 1, f(1) = -1, f(-1) = 3 - 2t.
class TentMap {
 public:
  explicit TentMap(double slope);

  double slope() const { return t_; }
  double critical_point() const { return c_; }
  /// f(-1) = 3 - 2t, the lowest value reached by the ascending branch.
  double left_image() const { return 3.0 - 2.0 * t_; }

  /// Throws DomainError if x is outside I beyond kEndpointSlack.
  double operator()(double x) const;

  /// Evaluation without the domain check; x must already lie in I.
  double apply(double x) const {
    const double up = t_ * x + (3.0 - t_);
    const double down = -t_ * x + (t_ - 1.0);
    const double y = up < down ? up : down;
    return y < -1.0 ? -1.0 : (y > 1.0 ? 1.0 : y);
  }

  /// Inverse of the ascending branch, defined for v in [3-2t, 1].
  double left_inverse(double v) const { return 1.0 + (v - 3.0) / t_; }
  /// Inverse of the descending branch, defined for all v in I.
  double right_inverse(double v) const { return 1.0 - (v + 1.0) / t_; }

 private:
  double t_;
  double c_;
};

inline double eval(const TentMap& map, double x) { return map(x); }

/// Sorted preimages of v (one or two points). The left-branch preimage is
/// present iff v >= 3 - 2t (with kEndpointSlack); at v = 1 both branches meet
/// at c and a single point is returned.
std::vector<double> preimage_points(const TentMap& map, double v);

/// Exact f^{-n}(S).
IntervalSet preimage_set(const TentMap& map, const IntervalSet& s, int n);

struct CriticalOrbit {
  std::vector<double> points;  // c, f(c), ..., f^depth(c)
  bool markov = false;
  // When markov: points[revisit_index] lies within tol of points[first_index].
  int first_index = -1;
  int revisit_index = -1;
};

CriticalOrbit critical_orbit(const TentMap& map, int depth, double tol);

/// Forward orbit generator used for all long statistical runs.
///
/// Each step applies f and then adds an independent uniform perturbation of
/// half-width 2^-53 before clamping to I. Without it, binary rounding makes
/// the slope-2 orbit lose one mantissa bit per step and collapse onto the
/// fixed point -1 within ~55 iterations; with it every slope produces a
/// 1e-16 pseudo-orbit, indistinguishable from plain rounding for t < 2.
class DitheredOrbit {
 public:
  DitheredOrbit(const TentMap& map, double x0, std::uint64_t seed);

  double current() const { return x_; }
  double next();

 private:
  TentMap map_;
  double x_;
  std::mt19937_64 rng_;
};

/// Uniform double in [0,1) built from the top 53 bits; independent of the
/// standard library's distribution implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace tentlab
