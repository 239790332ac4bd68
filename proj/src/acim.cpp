#include "tentlab/acim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "tentlab/error.hpp"
#include "tentlab/format.hpp"

namespace tentlab {

Density::Density(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.empty()) throw DomainError("density needs at least one bin");
  for (double v : w_) {
    if (!(v >= 0.0)) throw DomainError("density weight must be nonnegative");
  }
}

Density Density::uniform(std::size_t nbins) { return Density(std::vector<double>(nbins, 0.5)); }

Density Density::point_mass(std::size_t nbins, double x) {
  std::vector<double> m(nbins, 0.0);
  Density probe(std::vector<double>(nbins, 0.0));
  m[probe.bin_of(x)] = 1.0;
  return from_masses(std::move(m));
}

Density Density::from_masses(std::vector<double> masses) {
  if (masses.empty()) throw DomainError("density needs at least one bin");
  double total = 0.0;
  for (double v : masses) {
    if (!(v >= 0.0)) throw DomainError("bin mass must be nonnegative");
    total += v;
  }
  if (!(total > 0.0)) throw DomainError("cannot normalize a zero measure");
  const double scale = static_cast<double>(masses.size()) / (2.0 * total);
  for (double& v : masses) v *= scale;
  return Density(std::move(masses));
}

std::size_t Density::bin_of(double x) const {
  const double pos = (x + 1.0) / bin_width();
  if (!(pos > 0.0)) return 0;
  const auto i = static_cast<std::size_t>(pos);
  return std::min(i, w_.size() - 1);
}

double Density::integral() const {
  double s = 0.0;
  for (double v : w_) s += v;
  return s * bin_width();
}

double Density::mass(double lo, double hi) const {
  lo = std::max(lo, -1.0);
  hi = std::min(hi, 1.0);
  if (!(lo < hi)) return 0.0;
  const std::size_t first = bin_of(lo);
  const std::size_t last = bin_of(hi);
  double acc = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    const double a = std::max(lo, bin_left(i));
    const double b = std::min(hi, bin_right(i));
    if (b > a) acc += w_[i] * (b - a);
  }
  return acc;
}

double Density::mean() const {
  return expect([](double x) { return x; });
}

double UlamOperator::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) s += val[k];
  return s;
}

void UlamOperator::push_forward(const std::vector<double>& masses, std::vector<double>& out) const {
  out.assign(nbins, 0.0);
  for (std::size_t i = 0; i < nbins; ++i) {
    const double p = masses[i];
    if (p == 0.0) continue;
    for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) out[col[k]] += p * val[k];
  }
}

Density UlamOperator::push_forward(const Density& d) const {
  if (d.nbins() != nbins) throw ShapeMismatch("density and Ulam operator bin counts differ");
  std::vector<double> masses(d.weights());
  for (double& v : masses) v *= d.bin_width();
  std::vector<double> out;
  push_forward(masses, out);
  return Density::from_masses(std::move(out));
}

UlamOperator ulam_operator(const TentMap& map, std::size_t nbins) {
  if (nbins < 2) throw DomainError("Ulam operator needs at least 2 bins");
  UlamOperator op;
  op.nbins = nbins;
  op.row_start.reserve(nbins + 1);
  op.row_start.push_back(0);
  const double n = static_cast<double>(nbins);
  const double h = 2.0 / n;
  const double c = map.critical_point();
  // Positions in bin units; snapping keeps images that land on a bin edge
  // from leaving 1e-16 slivers in a neighbouring bin.
  auto to_units = [&](double y) {
    double u = (y + 1.0) / h;
    const double r = std::round(u);
    if (std::abs(u - r) < 1e-9) u = r;
    return std::clamp(u, 0.0, n);
  };
  std::map<std::size_t, double> row;
  for (std::size_t i = 0; i < nbins; ++i) {
    const double lo = -1.0 + h * static_cast<double>(i);
    const double hi = i + 1 == nbins ? 1.0 : -1.0 + h * static_cast<double>(i + 1);
    row.clear();
    auto add_piece = [&](double p, double q) {
      if (!(q > p)) return;
      const double frac = (q - p) / (hi - lo);
      double a = to_units(map.apply(p));
      double b = to_units(map.apply(q));
      if (a > b) std::swap(a, b);
      if (b - a <= 0.0) {
        row[std::min(static_cast<std::size_t>(a), nbins - 1)] += frac;
        return;
      }
      const auto j0 = static_cast<std::size_t>(std::floor(a));
      const auto j1 = std::min(static_cast<std::size_t>(std::ceil(b)), nbins);
      for (std::size_t j = j0; j < j1; ++j) {
        const double ov = std::min(b, static_cast<double>(j + 1)) - std::max(a, static_cast<double>(j));
        if (ov > 0.0) row[j] += frac * ov / (b - a);
      }
    };
    if (c > lo && c < hi) {
      add_piece(lo, c);
      add_piece(c, hi);
    } else {
      add_piece(lo, hi);
    }
    double total = 0.0;
    for (const auto& [j, v] : row) total += v;
    for (const auto& [j, v] : row) {
      op.col.push_back(j);
      op.val.push_back(v / total);
    }
    op.row_start.push_back(op.col.size());
  }
  return op;
}

StationaryResult stationary_solve(const UlamOperator& op, double tol, int maxiter) {
  if (!(tol > 0.0)) throw DomainError("stationary tolerance must be positive");
  const std::size_t n = op.nbins;
  std::vector<double> p(n, 1.0 / static_cast<double>(n));
  std::vector<double> q;
  double residual = 0.0;
  for (int it = 0; it <= maxiter; ++it) {
    op.push_forward(p, q);
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual += std::abs(q[i] - p[i]);
    if (residual <= tol) {
      return {Density::from_masses(std::move(p)), residual, it};
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = 0.5 * (p[i] + q[i]);
      total += p[i];
    }
    for (double& v : p) v /= total;
  }
  throw ConvergenceError("stationary density did not converge: residual " + format_double(residual) +
                             " > tol " + format_double(tol),
                         residual);
}

Density stationary_density(const UlamOperator& op, double tol, int maxiter) {
  return stationary_solve(op, tol, maxiter).density;
}

Density birkhoff_histogram(const TentMap& map, const BirkhoffParams& params) {
  if (!(params.n > params.burnin && params.burnin >= 0)) {
    throw DomainError("Birkhoff histogram needs n > burnin >= 0");
  }
  if (params.nbins < 1) throw DomainError("Birkhoff histogram needs at least one bin");
  std::mt19937_64 init(params.seed);
  const double x0 = params.x0 ? *params.x0 : -1.0 + 2.0 * uniform01(init);
  // Distinct stream for the dither so x0 does not share draws with it.
  DitheredOrbit orbit(map, x0, params.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<double> counts(params.nbins, 0.0);
  const double scale = static_cast<double>(params.nbins) / 2.0;
  double x = orbit.current();
  for (std::int64_t i = 0; i < params.n; ++i) {
    if (i >= params.burnin) {
      auto b = static_cast<std::size_t>((x + 1.0) * scale);
      counts[std::min(b, params.nbins - 1)] += 1.0;
    }
    x = orbit.next();
  }
  return Density::from_masses(std::move(counts));
}

double MarkovDensity::value_at(double x) const {
  auto it = std::upper_bound(cuts.begin(), cuts.end(), x);
  std::size_t k = it == cuts.begin() ? 0 : static_cast<std::size_t>(it - cuts.begin()) - 1;
  return values[std::min(k, values.size() - 1)];
}

Density MarkovDensity::resample(std::size_t nbins) const {
  std::vector<double> masses(nbins, 0.0);
  const double h = 2.0 / static_cast<double>(nbins);
  for (std::size_t i = 0; i < nbins; ++i) {
    const double lo = -1.0 + h * static_cast<double>(i);
    const double hi = lo + h;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double a = std::max(lo, cuts[k]);
      const double b = std::min(hi, cuts[k + 1]);
      if (b > a) masses[i] += values[k] * (b - a);
    }
  }
  return Density::from_masses(std::move(masses));
}

MarkovDensity markov_partition_density(const TentMap& map, int depth, double tol) {
  const CriticalOrbit orbit = critical_orbit(map, depth, tol);
  if (!orbit.markov) {
    throw NotMarkovError("critical orbit of slope " + format_double(map.slope()) +
                         " shows no revisit within depth " + std::to_string(depth));
  }
  std::vector<double> cuts{-1.0, 1.0};
  for (int j = 0; j < orbit.revisit_index; ++j) cuts.push_back(orbit.points[j]);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> merged;
  for (double v : cuts) {
    if (merged.empty() || v - merged.back() > tol) merged.push_back(v);
  }
  merged.back() = 1.0;
  merged.front() = -1.0;

  const auto k = static_cast<Eigen::Index>(merged.size() - 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double fa = map.apply(merged[j]);
    const double fb = map.apply(merged[j + 1]);
    const double lo = std::min(fa, fb);
    const double hi = std::max(fa, fb);
    for (Eigen::Index i = 0; i < k; ++i) {
      const double mid = 0.5 * (merged[i] + merged[i + 1]);
      if (mid > lo && mid < hi) a(i, j) = 1.0 / map.slope();
    }
  }
  a -= Eigen::MatrixXd::Identity(k, k);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  for (Eigen::Index j = 0; j < k; ++j) a(k - 1, j) = merged[j + 1] - merged[j];
  rhs(k - 1) = 1.0;
  const Eigen::VectorXd rho = a.fullPivLu().solve(rhs);

  MarkovDensity out;
  out.cuts = merged;
  out.values.resize(static_cast<std::size_t>(k));
  double total = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    out.values[j] = std::max(rho(j), 0.0);
    total += out.values[j] * (merged[j + 1] - merged[j]);
  }
  for (double& v : out.values) v /= total;
  return out;
}

Density markov_exact_density(const TentMap& map, std::size_t nbins) {
  return markov_partition_density(map).resample(nbins);
}

namespace {

void require_same_shape(const Density& a, const Density& b) {
  if (a.nbins() != b.nbins()) {
    throw ShapeMismatch("densities have different bin counts: " + std::to_string(a.nbins()) +
                        " vs " + std::to_string(b.nbins()));
  }
}

}  // namespace

double wasserstein1(const Density& a, const Density& b) {
  require_same_shape(a, b);
  const double h = a.bin_width();
  double diff_left = 0.0;  // F_a - F_b at the left edge of the current bin
  double acc = 0.0;
  for (std::size_t i = 0; i < a.nbins(); ++i) {
    const double diff_right = diff_left + (a[i] - b[i]) * h;
    const double l = std::abs(diff_left);
    const double r = std::abs(diff_right);
    if ((diff_left >= 0.0) == (diff_right >= 0.0) || l + r == 0.0) {
      acc += 0.5 * h * (l + r);
    } else {
      acc += 0.5 * h * (l * l + r * r) / (l + r);
    }
    diff_left = diff_right;
  }
  return acc;
}

double l1_density_distance(const Density& a, const Density& b) {
  require_same_shape(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.nbins(); ++i) acc += std::abs(a[i] - b[i]);
  return acc * a.bin_width();
}

void write_density_csv(std::ostream& os, const Density& d, const std::vector<std::string>& header) {
  for (const auto& line : header) os << "# " << line << '\n';
  os << "bin_left,bin_right,weight\n";
  for (std::size_t i = 0; i < d.nbins(); ++i) {
    os << format_double(d.bin_left(i)) << ',' << format_double(d.bin_right(i)) << ','
       << format_double(d[i]) << '\n';
  }
}

Density read_density_csv(std::istream& is) {
  std::string line;
  std::vector<double> w;
  bool saw_header = false;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != "bin_left,bin_right,weight") {
        throw ParseError("line " + std::to_string(lineno) + ": expected density CSV header");
      }
      saw_header = true;
      continue;
    }
    const auto last = line.rfind(',');
    if (std::count(line.begin(), line.end(), ',') != 2) {
      throw ParseError("line " + std::to_string(lineno) + ": expected three columns");
    }
    w.push_back(parse_double(line.substr(last + 1)));
  }
  if (w.empty()) throw ParseError("density CSV has no rows");
  return Density(std::move(w));
}

}  // namespace tentlab
