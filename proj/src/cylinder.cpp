#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "tentlab/error.hpp"
#include "tentlab/format.hpp"
#include "tentlab/inverse_limit.hpp"

namespace tentlab {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

}  // namespace

bool TiltedRectangle::contains(double x, double t) const {
  const double dx = x - x0;
  const double dt = t - t0;
  const double u = (dx + dt) / kSqrt2;
  const double v = (-dx + dt) / kSqrt2;
  return std::abs(u) < a && std::abs(v) < b;
}

Interval TiltedRectangle::slice_bounds(double t) const {
  const double dt = t - t0;
  const double lo = std::max(-a * kSqrt2 - dt, dt - b * kSqrt2);
  const double hi = std::min(a * kSqrt2 - dt, dt + b * kSqrt2);
  return {x0 + lo, x0 + hi};
}

IntervalSet TiltedRectangle::slice(double t) const {
  if (empty()) return {};
  const Interval iv = slice_bounds(t);
  if (!(iv.lo < iv.hi)) return {};
  return IntervalSet({iv});
}

TiltedRectangle intersect(const TiltedRectangle& r1, const TiltedRectangle& r2) {
  if (r1.empty() || r2.empty()) return {0.0, 0.0, 0.0, 0.0};
  auto uc = [](const TiltedRectangle& r) { return (r.x0 + r.t0) / kSqrt2; };
  auto vc = [](const TiltedRectangle& r) { return (-r.x0 + r.t0) / kSqrt2; };
  const double ulo = std::max(uc(r1) - r1.a, uc(r2) - r2.a);
  const double uhi = std::min(uc(r1) + r1.a, uc(r2) + r2.a);
  const double vlo = std::max(vc(r1) - r1.b, vc(r2) - r2.b);
  const double vhi = std::min(vc(r1) + r1.b, vc(r2) + r2.b);
  if (!(ulo < uhi && vlo < vhi)) return {0.0, 0.0, 0.0, 0.0};
  const double u = 0.5 * (ulo + uhi);
  const double v = 0.5 * (vlo + vhi);
  return {(u - v) / kSqrt2, (u + v) / kSqrt2, 0.5 * (uhi - ulo), 0.5 * (vhi - vlo)};
}

CylinderSet CylinderSet::canonical() const {
  std::map<int, TiltedRectangle> by_index;
  for (const auto& term : terms) {
    auto [it, fresh] = by_index.try_emplace(term.n, term.rect);
    if (!fresh) it->second = intersect(it->second, term.rect);
  }
  CylinderSet out;
  for (const auto& [n, rect] : by_index) out.terms.push_back({n, rect});
  return out;
}

int CylinderSet::max_index() const {
  int n = 0;
  for (const auto& term : terms) n = std::max(n, term.n);
  return n;
}

bool CylinderSet::contains(const Thread& th) const {
  for (const auto& term : terms) {
    if (term.n >= th.depth()) throw ShapeMismatch("thread too shallow for cylinder set");
    if (!term.rect.contains(th.x[static_cast<std::size_t>(term.n)], th.t)) return false;
  }
  return true;
}

ReducedCylinder cylinder_reduce(const TentMap& map, const CylinderSet& set) {
  if (set.terms.empty()) throw DomainError("cylinder set needs at least one term");
  ReducedCylinder out;
  out.n_k = set.max_index();
  out.slice = IntervalSet::whole();
  for (const auto& term : set.terms) {
    if (term.n < 0) throw DomainError("cylinder term index must be nonnegative");
    const IntervalSet base = term.rect.slice(map.slope());
    out.slice = out.slice.intersect(preimage_set(map, base, out.n_k - term.n));
    if (out.slice.empty()) break;
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::pair<double, double> parse_pair(const std::string& text, int lineno) {
  const std::string v = trim(text);
  const auto comma = v.find(',');
  if (v.size() < 2 || v.front() != '[' || v.back() != ']' || comma == std::string::npos) {
    throw ParseError("line " + std::to_string(lineno) + ": expected [a, b], got '" + v + "'");
  }
  try {
    return {parse_double(trim(v.substr(1, comma - 1))),
            parse_double(trim(v.substr(comma + 1, v.size() - comma - 2)))};
  } catch (const ParseError& e) {
    throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
  }
}

}  // namespace

CylinderSet parse_cylinder_set(std::istream& is) {
  struct Pending {
    bool has_n = false, has_center = false, has_half = false;
    CylinderTerm term;
    int line = 0;
  };
  CylinderSet out;
  std::vector<Pending> blocks;
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line == "[[term]]") {
      blocks.push_back({});
      blocks.back().line = lineno;
      continue;
    }
    if (blocks.empty()) throw ParseError("line " + std::to_string(lineno) + ": key outside a [[term]] block");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    Pending& cur = blocks.back();
    if (key == "n") {
      double n = 0.0;
      try {
        n = parse_double(value);
      } catch (const ParseError& e) {
        throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
      }
      if (n < 0 || n != std::floor(n) || n > 62) {
        throw ParseError("line " + std::to_string(lineno) + ": n must be an integer in [0, 62]");
      }
      cur.term.n = static_cast<int>(n);
      cur.has_n = true;
    } else if (key == "center") {
      auto [x0, t0] = parse_pair(value, lineno);
      cur.term.rect.x0 = x0;
      cur.term.rect.t0 = t0;
      cur.has_center = true;
    } else if (key == "half") {
      auto [a, b] = parse_pair(value, lineno);
      if (!(a > 0.0 && b > 0.0)) {
        throw ParseError("line " + std::to_string(lineno) + ": half-lengths must be positive");
      }
      cur.term.rect.a = a;
      cur.term.rect.b = b;
      cur.has_half = true;
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (blocks.empty()) throw ParseError("cylinder set file has no [[term]] blocks");
  for (const auto& b : blocks) {
    if (!(b.has_n && b.has_center && b.has_half)) {
      throw ParseError("line " + std::to_string(b.line) + ": term needs n, center and half");
    }
    out.terms.push_back(b.term);
  }
  return out;
}

void write_cylinder_set(std::ostream& os, const CylinderSet& set) {
  for (const auto& term : set.terms) {
    os << "[[term]]\n"
       << "n = " << term.n << '\n'
       << "center = [" << format_double(term.rect.x0) << ", " << format_double(term.rect.t0) << "]\n"
       << "half = [" << format_double(term.rect.a) << ", " << format_double(term.rect.b) << "]\n";
  }
}

std::vector<CylinderEstimate> cylinder_measures(const TentMap& map, const std::vector<CylinderSet>& sets,
                                                const Density& acim, ThreadSamplerParams sampler) {
  std::vector<CylinderEstimate> out(sets.size());
  int need = 1;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const ReducedCylinder red = cylinder_reduce(map, sets[i]);
    double exact = 0.0;
    for (const auto& part : red.slice.components()) exact += acim.mass(part.lo, part.hi);
    out[i].exact = exact;
    need = std::max(need, red.n_k + 1);
  }
  sampler.depth = std::max(sampler.depth, need);
  ThreadSampler stream(map, sampler);
  const std::int64_t total = stream.capacity();
  const std::int64_t batches = std::min<std::int64_t>(kStderrBatches, total);
  std::vector<std::vector<double>> hits(sets.size(), std::vector<double>(static_cast<std::size_t>(batches), 0.0));
  std::vector<double> batch_size(static_cast<std::size_t>(batches), 0.0);
  Thread th;
  std::int64_t idx = 0;
  while (stream.next(th)) {
    const auto batch = static_cast<std::size_t>(idx * batches / total);
    batch_size[batch] += 1.0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (sets[i].contains(th)) hits[i][batch] += 1.0;
    }
    ++idx;
  }
  for (std::size_t i = 0; i < sets.size(); ++i) {
    double count = 0.0;
    for (double h : hits[i]) count += h;
    const double mean = count / static_cast<double>(idx);
    double ss = 0.0;
    for (std::size_t b = 0; b < hits[i].size(); ++b) {
      const double d = hits[i][b] / batch_size[b] - mean;
      ss += d * d;
    }
    const double nb = static_cast<double>(batches);
    double se = nb > 1 ? std::sqrt(ss / (nb - 1.0) / nb) : 0.0;
    if (count == 0.0 || count == static_cast<double>(idx)) {
      const double p = std::clamp(out[i].exact, 0.0, 1.0);
      se = std::sqrt(p * (1.0 - p) / static_cast<double>(idx));
    }
    out[i].mc = mean;
    out[i].mc_stderr = se;
    out[i].samples = idx;
  }
  return out;
}

CylinderEstimate cylinder_measure(const TentMap& map, const CylinderSet& set, const Density& acim,
                                  const ThreadSamplerParams& sampler) {
  return cylinder_measures(map, {set}, acim, sampler).front();
}

}  // namespace tentlab
