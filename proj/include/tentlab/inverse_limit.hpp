#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "tentlab/acim.hpp"
#include "tentlab/disk.hpp"
#include "tentlab/tent_map.hpp"

namespace tentlab {

inline constexpr double kThreadResidualTol = 1e-9;
inline constexpr int kDefaultDepth = 12;

/// Truncated point <x_0, x_1, ..., x_{N-1}> of the inverse limit of f_t,
/// with f_t(x_{n+1}) = x_n. The slope tag identifies the slice it lives in.
struct Thread {
  double t = 2.0;
  std::vector<double> x;

  int depth() const { return static_cast<int>(x.size()); }
  /// max_n |f_t(x_{n+1}) - x_n|.
  double residual() const;
  bool valid(double tol = kThreadResidualTol) const { return residual() <= tol; }
};

/// Truncated point of the inverse limit of H_t on the disk.
struct DiskThread {
  double t = 2.0;
  std::vector<CylinderPoint> z;

  int depth() const { return static_cast<int>(z.size()); }
  /// max_n plane distance between H_t(z_{n+1}) and z_n.
  double residual() const;
};

struct AnnulusPoint {
  double y = 0.0;
  double s = 0.0;
};

/// Truncated thread distance sum_{n<N} d(a_n, b_n) / 2^n together with the
/// bound on the discarded tail, diam * 2^{1-N}.
struct ThreadDistance {
  double distance = 0.0;
  double tail_bound = 0.0;
};

/// Natural extension <x_0, ...> -> <f(x_0), x_0, ...>; keeps the depth by
/// dropping the last entry.
Thread nat_ext_step(const TentMap& map, const Thread& th);
/// Same for H_t on disk threads.
DiskThread nat_ext_step(const TentMap& map, const DiskThread& th);

/// Drops the head and appends a preimage of the last entry; `right_branch`
/// picks the descending inverse when both exist.
Thread nat_ext_unstep(const TentMap& map, const Thread& th, bool right_branch);

/// Tail bound uses diam(I) = 2, i.e. 2^{2-N}.
ThreadDistance thread_metric(const Thread& a, const Thread& b);
/// Plane distance on D, diam(D) = 4, tail 2^{3-N}.
ThreadDistance thread_metric(const DiskThread& a, const DiskThread& b);

/// Parameterization of the complement of the attractor. For s < 1 the thread
/// is <(y,s), (y,s/2), ...>; for s >= 1 with k = floor(s) and v = (frac(s)+1)/2
/// it starts with the k forward images f^{k-1}(H(y,v)), ..., H(y,v), followed
/// by (y,v), (y,v/2), ...
DiskThread psi(const TentMap& map, const AnnulusPoint& p, int depth);

/// Inverse of psi. Throws AllOnIntervalError if every entry lies on I.
AnnulusPoint psi_inverse(const TentMap& map, const DiskThread& th);

/// (y, 2s) for s <= 1, (y, s+1) for s >= 1.
AnnulusPoint annulus_shift(const AnnulusPoint& p);

/// Background probability measure on S x [0, inf) with density
/// 1 / (K (1 + s^2)), K = pi^2.
struct AnnulusMeasure {
  static constexpr double kNormalization = kPi * kPi;
  static double density(double /*y*/, double s) { return 1.0 / (kNormalization * (1.0 + s * s)); }
  /// m(S x [0, s]) = (2/pi) arctan(s).
  static double radial_cdf(double s);
  static double total_mass() { return kTwoPi * (kPi / 2.0) / kNormalization; }
};

/// i.i.d. draws: y uniform on [0, 2pi), s = tan(pi U / 2).
std::vector<AnnulusPoint> sample_m(std::uint64_t seed, std::size_t count);

/// Open rectangle in the (x, t) strip, rotated by pi/4 about its center:
/// with u = ((x-x0)+(t-t0))/sqrt2, v = (-(x-x0)+(t-t0))/sqrt2 it is
/// |u| < a, |v| < b.
struct TiltedRectangle {
  double x0 = 0.0;
  double t0 = 0.0;
  double a = 0.0;
  double b = 0.0;

  bool contains(double x, double t) const;
  /// Open x-interval of the slice at t, before clipping to I (lo >= hi when empty).
  Interval slice_bounds(double t) const;
  /// Closure of the slice, clipped to I.
  IntervalSet slice(double t) const;
  bool empty() const { return !(a > 0.0 && b > 0.0); }
  bool operator==(const TiltedRectangle&) const = default;
};

/// Intersection, again a tilted rectangle (possibly empty).
TiltedRectangle intersect(const TiltedRectangle& r1, const TiltedRectangle& r2);

struct CylinderTerm {
  int n = 0;
  TiltedRectangle rect;
  bool operator==(const CylinderTerm&) const = default;
};

/// Finite intersection of pi_{n_i}^{-1}(R_i).
struct CylinderSet {
  std::vector<CylinderTerm> terms;

  /// Merges terms with equal n by intersecting their rectangles and sorts by n.
  CylinderSet canonical() const;
  int max_index() const;
  /// Membership of a raw thread (open conditions on each x_{n_i}).
  bool contains(const Thread& th) const;
  bool operator==(const CylinderSet&) const = default;
};

struct ReducedCylinder {
  int n_k = 0;
  IntervalSet slice;  // B^(t)
};

/// A = pi_{n_k}^{-1}(B) with B^(t) = intersection of f_t^{-(n_k - n_i)}(R_i^(t)).
ReducedCylinder cylinder_reduce(const TentMap& map, const CylinderSet& set);

/// Cylinder-set file: blocks of
///   [[term]]
///   n = 2
///   center = [0.1, 1.8]
///   half = [0.3, 0.2]
/// with '#' comments.
CylinderSet parse_cylinder_set(std::istream& is);
void write_cylinder_set(std::ostream& os, const CylinderSet& set);

struct ThreadSamplerParams {
  std::int64_t orbit_length = 1000000;
  int depth = kDefaultDepth;
  std::int64_t burnin = 1000;
  std::uint64_t seed = 1;
};

/// Windows <x_m, x_{m-1}, ..., x_{m-N+1}> of one long forward orbit, for
/// m = burnin + N - 1, ..., orbit_length - 1. Each window is recomputed from
/// its oldest entry with exact f_t steps, so it satisfies the thread condition
/// with zero residual.
class ThreadSampler {
 public:
  ThreadSampler(const TentMap& map, const ThreadSamplerParams& params);

  /// False once the orbit is exhausted.
  bool next(Thread& out);
  std::int64_t emitted() const { return emitted_; }
  std::int64_t capacity() const { return params_.orbit_length - params_.burnin - params_.depth + 1; }

 private:
  TentMap map_;
  ThreadSamplerParams params_;
  DitheredOrbit orbit_;
  std::deque<double> window_;  // oldest first
  std::int64_t position_ = 0;  // index of the most recent orbit point
  std::int64_t emitted_ = 0;
};

struct CylinderEstimate {
  double exact = 0.0;      // acim mass of the reduced slice
  double mc = 0.0;         // fraction of sampled threads lying in the set
  double mc_stderr = 0.0;  // batch-means standard error of `mc`
  std::int64_t samples = 0;
};

inline constexpr int kStderrBatches = 50;

/// Exact-slice and thread-frequency estimates of the induced measure of each
/// set, sharing one pass over the sampler. Sampler depth is raised to cover
/// the largest term index if needed. When every batch agrees (all hits or
/// none) the standard error falls back to the binomial value at `exact`.
std::vector<CylinderEstimate> cylinder_measures(const TentMap& map, const std::vector<CylinderSet>& sets,
                                                const Density& acim, ThreadSamplerParams sampler);
CylinderEstimate cylinder_measure(const TentMap& map, const CylinderSet& set, const Density& acim,
                                  const ThreadSamplerParams& sampler);

/// CSV rows "t,x0,x1,...,x{N-1}".
void write_threads_csv(std::ostream& os, const std::vector<Thread>& threads,
                       const std::vector<std::string>& header = {});

}  // namespace tentlab
