#pragma once

#include <vector>

namespace tentlab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool degenerate() const { return lo == hi; }
};

/// Finite union of pairwise disjoint closed subintervals of [-1,1], kept
/// sorted. Components that touch or overlap are merged on construction.
/// Single-point components are kept.
class IntervalSet {
 public:
  IntervalSet() = default;
  /// Clips each interval to [-1,1], drops empty ones, sorts and merges.
  explicit IntervalSet(std::vector<Interval> parts);

  static IntervalSet whole() { return IntervalSet({{-1.0, 1.0}}); }
  static IntervalSet single(double lo, double hi) { return IntervalSet({{lo, hi}}); }

  const std::vector<Interval>& components() const { return parts_; }
  std::size_t size() const { return parts_.size(); }
  bool empty() const { return parts_.empty(); }

  /// Two per component, one per degenerate component.
  std::size_t boundary_count() const;
  std::vector<double> boundary_points() const;
  double measure() const;
  bool contains(double x) const;

  IntervalSet intersect(const IntervalSet& other) const;
  IntervalSet unite(const IntervalSet& other) const;

  /// Same components with endpoints within tol.
  bool approx_equal(const IntervalSet& other, double tol) const;

 private:
  std::vector<Interval> parts_;
};

}  // namespace tentlab
