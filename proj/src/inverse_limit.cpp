#include "tentlab/inverse_limit.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "tentlab/error.hpp"
#include "tentlab/format.hpp"

namespace tentlab {

double Thread::residual() const {
  const TentMap map(t);
  double worst = 0.0;
  for (std::size_t n = 0; n + 1 < x.size(); ++n) worst = std::max(worst, std::abs(map(x[n + 1]) - x[n]));
  return worst;
}

double DiskThread::residual() const {
  const TentMap map(t);
  double worst = 0.0;
  for (std::size_t n = 0; n + 1 < z.size(); ++n) {
    worst = std::max(worst, plane_distance(h_step(map, z[n + 1]), z[n]));
  }
  return worst;
}

namespace {

void require_slope(const TentMap& map, double t) {
  if (map.slope() != t) {
    throw ShapeMismatch("thread slope " + format_double(t) + " does not match map slope " +
                        format_double(map.slope()));
  }
}

}  // namespace

Thread nat_ext_step(const TentMap& map, const Thread& th) {
  require_slope(map, th.t);
  Thread out{th.t, {}};
  if (th.x.empty()) return out;
  out.x.reserve(th.x.size());
  out.x.push_back(map(th.x.front()));
  out.x.insert(out.x.end(), th.x.begin(), th.x.end() - 1);
  return out;
}

DiskThread nat_ext_step(const TentMap& map, const DiskThread& th) {
  require_slope(map, th.t);
  DiskThread out{th.t, {}};
  if (th.z.empty()) return out;
  out.z.reserve(th.z.size());
  out.z.push_back(h_step(map, th.z.front()));
  out.z.insert(out.z.end(), th.z.begin(), th.z.end() - 1);
  return out;
}

Thread nat_ext_unstep(const TentMap& map, const Thread& th, bool right_branch) {
  require_slope(map, th.t);
  if (th.x.empty()) return th;
  Thread out{th.t, std::vector<double>(th.x.begin() + 1, th.x.end())};
  const auto pre = preimage_points(map, th.x.back());
  out.x.push_back(right_branch || pre.size() == 1 ? pre.back() : pre.front());
  return out;
}

namespace {

template <class Seq, class Dist>
ThreadDistance weighted_sum(const Seq& a, const Seq& b, double diam, Dist&& dist) {
  if (a.size() != b.size()) {
    throw ShapeMismatch("threads have different depths: " + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()));
  }
  ThreadDistance out;
  double weight = 1.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    out.distance += dist(a[n], b[n]) * weight;
    weight *= 0.5;
  }
  // sum_{n >= N} diam / 2^n = diam * 2^{1-N}
  out.tail_bound = diam * 2.0 * weight;
  return out;
}

}  // namespace

ThreadDistance thread_metric(const Thread& a, const Thread& b) {
  if (a.t != b.t) throw ShapeMismatch("threads belong to different slopes");
  return weighted_sum(a.x, b.x, 2.0, [](double p, double q) { return std::abs(p - q); });
}

ThreadDistance thread_metric(const DiskThread& a, const DiskThread& b) {
  if (a.t != b.t) throw ShapeMismatch("disk threads belong to different slopes");
  return weighted_sum(a.z, b.z, 4.0,
                      [](const CylinderPoint& p, const CylinderPoint& q) { return plane_distance(p, q); });
}

DiskThread psi(const TentMap& map, const AnnulusPoint& p, int depth) {
  if (depth < 1) throw DomainError("psi depth must be >= 1");
  if (!(p.s >= 0.0)) throw DomainError("annulus point needs s >= 0");
  DiskThread out{map.slope(), {}};
  out.z.reserve(static_cast<std::size_t>(depth));
  const double y = wrap_angle(p.y);
  auto halving_tail = [&](double s0) {
    double s = s0;
    while (out.depth() < depth) {
      out.z.push_back({y, s});
      s *= 0.5;
    }
  };
  if (p.s < 1.0) {
    halving_tail(p.s);
    return out;
  }
  const double k_real = std::floor(p.s);
  const double v = (p.s - k_real + 1.0) / 2.0;
  const auto k = static_cast<std::int64_t>(k_real);
  // entries 0..k-1 are f^{k-1}(x), ..., f(x), x with x = H(y, v) on I.
  const double x = std::cos(h_step(map, {y, v}).y);
  const std::int64_t head = std::min<std::int64_t>(k, depth);
  std::vector<double> on_i(static_cast<std::size_t>(head));
  // Advance to f^{k-head}(x), then record the visible entries newest first.
  double cur = x;
  for (std::int64_t i = 0; i < k - head; ++i) cur = map.apply(cur);
  for (std::int64_t i = head - 1; i >= 0; --i) {
    on_i[static_cast<std::size_t>(i)] = cur;
    if (i > 0) cur = map.apply(cur);
  }
  for (double val : on_i) out.z.push_back(interval_point(val));
  halving_tail(v);
  return out;
}

AnnulusPoint psi_inverse(const TentMap& map, const DiskThread& th) {
  require_slope(map, th.t);
  for (std::size_t k = 0; k < th.z.size(); ++k) {
    const CylinderPoint& zk = th.z[k];
    if (on_interval(zk)) continue;
    if (k == 0) return {wrap_angle(zk.y), zk.s};
    return {wrap_angle(zk.y), static_cast<double>(k) + 2.0 * zk.s - 1.0};
  }
  throw AllOnIntervalError("all " + std::to_string(th.z.size()) +
                           " thread entries lie on I; not in the complement of the attractor at this depth");
}

AnnulusPoint annulus_shift(const AnnulusPoint& p) {
  if (!(p.s >= 0.0)) throw DomainError("annulus point needs s >= 0");
  if (p.s <= 1.0) return {p.y, 2.0 * p.s};
  return {p.y, p.s + 1.0};
}

double AnnulusMeasure::radial_cdf(double s) { return s <= 0.0 ? 0.0 : (2.0 / kPi) * std::atan(s); }

std::vector<AnnulusPoint> sample_m(std::uint64_t seed, std::size_t count) {
  if (count < 1) throw DomainError("sample count must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<AnnulusPoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double y = kTwoPi * uniform01(rng);
    const double s = std::tan(0.5 * kPi * uniform01(rng));
    out.push_back({y, s});
  }
  return out;
}

namespace {

double initial_point(std::uint64_t seed) {
  std::mt19937_64 init(seed);
  return -1.0 + 2.0 * uniform01(init);
}

}  // namespace

ThreadSampler::ThreadSampler(const TentMap& map, const ThreadSamplerParams& params)
    : map_(map),
      params_(params),
      orbit_(map, initial_point(params.seed), params.seed ^ 0x9e3779b97f4a7c15ULL) {
  if (params.depth < 1) throw DomainError("thread depth must be >= 1");
  if (params.burnin < 0 || !(params.orbit_length > params.burnin + params.depth)) {
    throw DomainError("thread sampler needs orbit length > burnin + depth");
  }
  window_.push_back(orbit_.current());
}

bool ThreadSampler::next(Thread& out) {
  const auto depth = static_cast<std::size_t>(params_.depth);
  const std::int64_t first = params_.burnin + params_.depth - 1;
  const std::int64_t target = emitted_ == 0 ? first : position_ + 1;
  if (target >= params_.orbit_length) return false;
  while (position_ < target) {
    window_.push_back(orbit_.next());
    ++position_;
    if (window_.size() > depth) window_.pop_front();
  }
  out.t = map_.slope();
  out.x.resize(depth);
  double cur = window_.front();
  out.x[depth - 1] = cur;
  for (std::size_t j = depth - 1; j > 0; --j) {
    cur = map_.apply(cur);
    out.x[j - 1] = cur;
  }
  ++emitted_;
  return true;
}

void write_threads_csv(std::ostream& os, const std::vector<Thread>& threads,
                       const std::vector<std::string>& header) {
  for (const auto& line : header) os << "# " << line << '\n';
  std::size_t depth = threads.empty() ? 0 : threads.front().x.size();
  os << 't';
  for (std::size_t n = 0; n < depth; ++n) os << ",x" << n;
  os << '\n';
  for (const auto& th : threads) {
    os << format_double(th.t);
    for (double v : th.x) os << ',' << format_double(v);
    os << '\n';
  }
}

}  // namespace tentlab
