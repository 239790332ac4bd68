#include "tentlab/interval_set.hpp"

#include <algorithm>
#include <cmath>

namespace tentlab {

IntervalSet::IntervalSet(std::vector<Interval> parts) {
  for (auto& p : parts) {
    p.lo = std::max(p.lo, -1.0);
    p.hi = std::min(p.hi, 1.0);
  }
  std::erase_if(parts, [](const Interval& p) { return !(p.lo <= p.hi); });
  std::sort(parts.begin(), parts.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const auto& p : parts) {
    if (!parts_.empty() && p.lo <= parts_.back().hi) {
      parts_.back().hi = std::max(parts_.back().hi, p.hi);
    } else {
      parts_.push_back(p);
    }
  }
}

std::size_t IntervalSet::boundary_count() const {
  std::size_t n = 0;
  for (const auto& p : parts_) n += p.degenerate() ? 1 : 2;
  return n;
}

std::vector<double> IntervalSet::boundary_points() const {
  std::vector<double> pts;
  pts.reserve(2 * parts_.size());
  for (const auto& p : parts_) {
    pts.push_back(p.lo);
    if (!p.degenerate()) pts.push_back(p.hi);
  }
  return pts;
}

double IntervalSet::measure() const {
  double m = 0.0;
  for (const auto& p : parts_) m += p.length();
  return m;
}

bool IntervalSet::contains(double x) const {
  auto it = std::upper_bound(parts_.begin(), parts_.end(), x,
                             [](double v, const Interval& p) { return v < p.lo; });
  if (it == parts_.begin()) return false;
  --it;
  return x <= it->hi;
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  std::vector<Interval> out;
  std::size_t i = 0, j = 0;
  while (i < parts_.size() && j < other.parts_.size()) {
    const auto& a = parts_[i];
    const auto& b = other.parts_[j];
    const double lo = std::max(a.lo, b.lo);
    const double hi = std::min(a.hi, b.hi);
    if (lo <= hi) out.push_back({lo, hi});
    if (a.hi < b.hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
  std::vector<Interval> all = parts_;
  all.insert(all.end(), other.parts_.begin(), other.parts_.end());
  return IntervalSet(std::move(all));
}

bool IntervalSet::approx_equal(const IntervalSet& other, double tol) const {
  if (parts_.size() != other.parts_.size()) return false;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (std::abs(parts_[i].lo - other.parts_[i].lo) > tol) return false;
    if (std::abs(parts_[i].hi - other.parts_[i].hi) > tol) return false;
  }
  return true;
}

}  // namespace tentlab
