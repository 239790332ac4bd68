#include "tentlab/stability.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "tentlab/error.hpp"
#include "tentlab/format.hpp"
#include "tentlab/parallel.hpp"

namespace tentlab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string str(double v) { return format_double(v); }
std::string str(std::uint64_t v) { return std::to_string(v); }
std::string str(std::int64_t v) { return std::to_string(v); }
std::string str(int v) { return std::to_string(v); }

std::string join_grid(const std::vector<double>& grid) {
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) out += ' ';
    out += format_double(grid[i]);
  }
  return out;
}

std::size_t index_of(const std::vector<double>& grid, double t_star) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] == t_star) return i;
  }
  throw DomainError("reference slope " + format_double(t_star) + " is not in the grid");
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("parameter grid is empty");
  for (double t : grid) {
    if (!(t > 1.0 && t <= 2.0)) throw DomainError("grid slope outside (1,2]: " + format_double(t));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Observables

ObservableBank ObservableBank::standard() {
  std::vector<Observable> items;
  items.push_back({"x0", 1.0, [](std::span<const double> x) { return x[0]; }});
  items.push_back({"x0^2", 2.0, [](std::span<const double> x) { return x[0] * x[0]; }});
  items.push_back({"cos(pi x0)", kPi, [](std::span<const double> x) { return std::cos(kPi * x[0]); }});
  // |a0 a1 - b0 b1| <= |a0 - b0| + |a1 - b1| <= 2 d(a, b) on I.
  items.push_back({"x0*x1", 2.0, [](std::span<const double> x) { return x[0] * x[1]; }});
  constexpr double width = 0.25;
  // (1 - r^2)^2 has slope at most 8 / (3 sqrt 3) in r.
  const double bump_lipschitz = 8.0 / (3.0 * std::sqrt(3.0) * width);
  for (double c : {-0.8, -0.4, 0.0, 0.4, 0.8}) {
    items.push_back({"bump(" + format_double(c) + ")", bump_lipschitz, [c](std::span<const double> x) {
                       const double r = (x[0] - c) / width;
                       if (std::abs(r) >= 1.0) return 0.0;
                       const double q = 1.0 - r * r;
                       return q * q;
                     }});
  }
  return ObservableBank(std::move(items), 2);
}

ObservableBank ObservableBank::lipschitz_normalized() const {
  std::vector<Observable> out;
  for (const auto& ob : items_) {
    const double scale = 1.0 / ob.lipschitz;
    out.push_back({ob.name + "/L", 1.0, [f = ob.fn, scale](std::span<const double> x) { return scale * f(x); }});
  }
  return ObservableBank(std::move(out), coords_);
}

void ObservableBank::evaluate(std::span<const double> coords, std::span<double> out) const {
  for (std::size_t i = 0; i < items_.size(); ++i) out[i] = items_[i].fn(coords);
}

Basin parse_basin(const std::string& name) {
  if (name == "interval") return Basin::interval;
  if (name == "collar") return Basin::collar;
  if (name == "annulus") return Basin::annulus;
  throw DomainError("unknown basin '" + name + "' (expected interval, collar or annulus)");
}

std::string basin_name(Basin b) {
  switch (b) {
    case Basin::interval:
      return "interval";
    case Basin::collar:
      return "collar";
    case Basin::annulus:
      return "annulus";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Reports

bool SweepReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
}

double SweepReport::stat(const std::string& key) const {
  for (const auto& [k, v] : stats) {
    if (k == key) return v;
  }
  throw std::out_of_range("no statistic named " + key);
}

std::vector<double> SweepReport::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("no column named " + name);
  const auto j = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

void SweepReport::write_csv(std::ostream& os) const {
  os << "# tentlab " << TENTLAB_VERSION << " report=" << kind << '\n';
  for (const auto& [k, v] : params) os << "# param " << k << '=' << v << '\n';
  for (const auto& [k, v] : stats) os << "# stat " << k << '=' << format_double(v) << '\n';
  for (const auto& [k, v] : checks) os << "# check " << k << '=' << (v ? "pass" : "FAIL") << '\n';
  for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << columns[j];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << format_double(r[j]);
    os << '\n';
  }
}

void SweepReport::write_summary(std::ostream& os) const {
  os << "report: " << kind << " (tentlab " << TENTLAB_VERSION << ")\n";
  os << "parameters:\n";
  for (const auto& [k, v] : params) os << "  " << k << " = " << v << '\n';
  os << "statistics:\n";
  for (const auto& [k, v] : stats) os << "  " << k << " = " << format_double(v) << '\n';
  os << "checks:\n";
  for (const auto& [k, v] : checks) os << "  [" << (v ? "pass" : "FAIL") << "] " << k << '\n';
  os << "runtimes (s):\n";
  for (const auto& [k, v] : runtimes) os << "  " << k << " = " << format_double(v) << '\n';
  os << "verdict: " << (passed() ? "consistent with" : "NOT consistent with")
     << " the expected behaviour on the tested family\n";
}

double loglog_slope(std::span<const double> ts, std::span<const double> dists, double t_star) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] == t_star || !(dists[i] > 0.0)) continue;
    lx.push_back(-std::log(std::abs(ts[i] - t_star)));
    ly.push_back(std::log(dists[i]));
  }
  if (lx.size() < 2) return 0.0;
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

std::vector<double> dyadic_grid(double t_star, int kmin, int kmax, bool below, bool above) {
  std::vector<double> grid;
  for (int k = kmin; k <= kmax; ++k) {
    const double step = std::ldexp(1.0, -k);
    if (below && t_star - step > 1.0) grid.push_back(t_star - step);
    if (above && t_star + step <= 2.0) grid.push_back(t_star + step);
  }
  grid.push_back(t_star);
  return grid;
}

// ---------------------------------------------------------------------------
// acim sweep

SweepReport acim_sweep(const std::vector<double>& grid, double t_star, const AcimSweepParams& params) {
  check_grid(grid);
  const std::size_t ref = index_of(grid, t_star);
  const auto start = Clock::now();
  std::vector<Density> ulam(grid.size()), birk(grid.size());
  parallel_for(grid.size(), params.workers, [&](std::size_t i) {
    const TentMap map(grid[i]);
    ulam[i] = stationary_density(ulam_operator(map, params.bins), params.tol, params.maxiter);
    if (params.with_birkhoff) {
      BirkhoffParams bp;
      bp.n = params.birkhoff_n;
      bp.nbins = params.bins;
      bp.burnin = params.burnin;
      bp.seed = params.seed;  // common random numbers across the grid
      birk[i] = birkhoff_histogram(map, bp);
    }
  });

  SweepReport rep;
  rep.kind = "acim_sweep";
  rep.params = {{"grid", join_grid(grid)},
                {"t_star", str(t_star)},
                {"bins", str(params.bins)},
                {"tol", str(params.tol)},
                {"maxiter", str(params.maxiter)},
                {"birkhoff_n", params.with_birkhoff ? str(params.birkhoff_n) : "off"},
                {"burnin", str(params.burnin)},
                {"seed", str(params.seed)},
                {"near_radius", str(params.near_radius)},
                {"near_w1", str(params.near_w1)},
                {"estimator_swap", str(params.estimator_swap)}};
  rep.columns = {"t", "dt", "w1_ulam", "l1_ulam", "w1_birkhoff", "l1_birkhoff", "swap_diff"};
  bool near_ok = true, swap_ok = true;
  double near_worst = 0.0, swap_worst = 0.0;
  std::vector<double> w1s;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double dt = grid[i] - t_star;
    const double w1u = wasserstein1(ulam[i], ulam[ref]);
    const double l1u = l1_density_distance(ulam[i], ulam[ref]);
    double w1b = std::nan(""), l1b = std::nan(""), swap = 0.0;
    if (params.with_birkhoff) {
      w1b = wasserstein1(birk[i], birk[ref]);
      l1b = l1_density_distance(birk[i], birk[ref]);
      swap = std::abs(w1u - w1b);
      swap_worst = std::max(swap_worst, swap);
      if (swap > params.estimator_swap) swap_ok = false;
    }
    if (std::abs(dt) <= params.near_radius) {
      near_worst = std::max(near_worst, w1u);
      if (w1u > params.near_w1) near_ok = false;
    }
    w1s.push_back(w1u);
    rep.rows.push_back({grid[i], dt, w1u, l1u, w1b, l1b, swap});
  }
  const double slope = loglog_slope(grid, w1s, t_star);
  rep.stats = {{"loglog_slope_w1_ulam", slope}, {"near_max_w1", near_worst}, {"max_swap_diff", swap_worst}};
  if (grid.size() > 1) {
    rep.checks.push_back({"w1 <= near_w1 for |t - t*| <= near_radius", near_ok});
    rep.checks.push_back({"fitted log-log slope < 0", slope < 0.0});
    if (params.with_birkhoff) rep.checks.push_back({"ulam/birkhoff W1 differ by <= estimator_swap", swap_ok});
  }
  rep.runtimes = {{"total", seconds_since(start)}};
  return rep;
}

// ---------------------------------------------------------------------------
// Cylinder-set continuity

std::vector<CylinderSet> random_cylinder_sets(std::uint64_t seed, std::size_t count, double t_center,
                                              int max_index) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
  std::vector<CylinderSet> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    CylinderSet set;
    const int terms = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < terms; ++k) {
      CylinderTerm term;
      term.n = static_cast<int>(rng() % static_cast<std::uint64_t>(max_index + 1));
      term.rect = {uni(-0.8, 0.8), uni(t_center - 0.05, t_center + 0.05), uni(0.1, 0.5), uni(0.1, 0.5)};
      set.terms.push_back(term);
    }
    out.push_back(std::move(set));
  }
  return out;
}

SweepReport cylinder_continuity(const std::vector<CylinderSet>& sets, const std::vector<double>& grid,
                                double t_star, const CylinderContinuityParams& params) {
  check_grid(grid);
  const std::size_t ref = index_of(grid, t_star);
  const auto start = Clock::now();
  std::vector<std::vector<CylinderEstimate>> est(grid.size());
  parallel_for(grid.size(), params.workers, [&](std::size_t i) {
    const TentMap map(grid[i]);
    const Density acim = stationary_density(ulam_operator(map, params.bins), params.tol, params.maxiter);
    est[i] = cylinder_measures(map, sets, acim, params.sampler);  // same sampler seed at every slope
  });

  SweepReport rep;
  rep.kind = "cylinder_continuity";
  rep.params = {{"grid", join_grid(grid)},
                {"t_star", str(t_star)},
                {"sets", str(sets.size())},
                {"bins", str(params.bins)},
                {"orbit", str(params.sampler.orbit_length)},
                {"depth", str(params.sampler.depth)},
                {"burnin", str(params.sampler.burnin)},
                {"seed", str(params.sampler.seed)},
                {"near_radius", str(params.near_radius)},
                {"near_tol", str(params.near_tol)},
                {"agreement_se", str(params.agreement_se)}};
  rep.columns = {"set", "t", "dt", "exact", "mc", "mc_stderr", "z", "dev_from_t_star", "degenerate"};
  bool agree_ok = true, near_ok = true;
  double worst_z = 0.0, worst_near = 0.0;
  std::size_t degenerate = 0;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const TentMap ref_map(t_star);
    const bool degen = cylinder_reduce(ref_map, sets[s]).slice.measure() == 0.0;
    if (degen) ++degenerate;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& e = est[i][s];
      const double diff = std::abs(e.exact - e.mc);
      // Differences at rounding level count as exact agreement.
      const double z = diff <= 1e-12 ? 0.0 : (e.mc_stderr > 0.0 ? diff / e.mc_stderr : INFINITY);
      const double dev = std::abs(e.exact - est[ref][s].exact);
      const double dt = grid[i] - t_star;
      worst_z = std::max(worst_z, z);
      if (z > params.agreement_se) agree_ok = false;
      if (!degen && std::abs(dt) <= params.near_radius) {
        worst_near = std::max(worst_near, dev);
        if (dev > params.near_tol) near_ok = false;
      }
      rep.rows.push_back({static_cast<double>(s), grid[i], dt, e.exact, e.mc, e.mc_stderr, z, dev,
                          degen ? 1.0 : 0.0});
    }
  }
  rep.stats = {{"max_z", worst_z}, {"near_max_dev", worst_near}, {"degenerate_sets", static_cast<double>(degenerate)}};
  rep.checks = {{"exact and thread-frequency estimates agree within agreement_se standard errors", agree_ok},
                {"|mu(A; t) - mu(A; t*)| <= near_tol for |t - t*| <= near_radius", near_ok}};
  rep.runtimes = {{"total", seconds_since(start)}};
  return rep;
}

// ---------------------------------------------------------------------------
// Physicality

std::vector<double> reference_integrals(const TentMap& map, const ObservableBank& bank, std::int64_t orbit,
                                        std::uint64_t seed) {
  ThreadSamplerParams sp;
  sp.orbit_length = orbit;
  sp.depth = std::max(bank.coords(), 1);
  sp.burnin = 1000;
  sp.seed = seed;
  ThreadSampler sampler(map, sp);
  std::vector<double> acc(bank.size(), 0.0), vals(bank.size());
  Thread th;
  std::int64_t n = 0;
  while (sampler.next(th)) {
    bank.evaluate(th.x, vals);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += vals[j];
    ++n;
  }
  for (double& v : acc) v /= static_cast<double>(n);
  return acc;
}

std::vector<double> orbit_averages(const TentMap& map, const ObservableBank& bank, const CylinderPoint& start,
                                   std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("orbit length must be >= 1");
  std::vector<double> acc(bank.size(), 0.0), vals(bank.size());
  double window[2] = {0.0, eta(start).u};  // {z_i, z_{i-1}} as first plane coordinates
  CylinderPoint z = start;
  std::int64_t i = 0;
  // Off I the orbit is finite: s doubles until it reaches the collar, then one step lands on I.
  while (i < n && !on_interval(z)) {
    z = h_step(map, z);
    window[0] = eta(z).u;
    bank.evaluate(window, vals);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += vals[j];
    window[1] = window[0];
    ++i;
  }
  DitheredOrbit orbit(map, std::cos(z.y), seed);
  for (; i < n; ++i) {
    window[0] = orbit.next();
    bank.evaluate(window, vals);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += vals[j];
    window[1] = window[0];
  }
  for (double& v : acc) v /= static_cast<double>(n);
  return acc;
}

PhysicalityReport physicality_test(const TentMap& map, const ObservableBank& bank, const PhysicalityParams& params) {
  if (!(params.eps > 0.0)) throw DomainError("physicality eps must be positive");
  if (params.samples < 1) throw DomainError("physicality needs at least one sample");
  if (bank.coords() > 2) throw DomainError("physicality orbit windows carry two coordinates");
  const auto start = Clock::now();
  PhysicalityReport out;
  out.reference = reference_integrals(map, bank, params.reference_orbit, derive_seed(params.seed, 0xfeed));
  const double ref_time = seconds_since(start);
  out.averages.resize(params.samples);
  out.max_deviation.resize(params.samples);
  out.starts.resize(params.samples);
  const double lo_cdf = AnnulusMeasure::radial_cdf(params.basin.s_min);
  const double hi_cdf = AnnulusMeasure::radial_cdf(params.basin.s_max);
  parallel_for(params.samples, params.workers, [&](std::size_t i) {
    const std::uint64_t task_seed = derive_seed(params.seed, i);
    std::mt19937_64 rng(task_seed);
    CylinderPoint z;
    AnnulusPoint label;
    switch (params.basin.kind) {
      case Basin::interval: {
        const double x = -1.0 + 2.0 * uniform01(rng);
        z = interval_point(x);
        label = {z.y, 1.0};
        break;
      }
      case Basin::collar: {
        const double y = kTwoPi * uniform01(rng);
        const double s = 0.5 + 0.25 * uniform01(rng);
        z = {y, s};
        label = {y, s};
        break;
      }
      case Basin::annulus: {
        const double y = kTwoPi * uniform01(rng);
        const double u = lo_cdf + (hi_cdf - lo_cdf) * uniform01(rng);
        const double s = std::tan(0.5 * kPi * u);
        label = {y, s};
        z = psi(map, label, 1).z.front();
        break;
      }
    }
    out.starts[i] = label;
    out.averages[i] = orbit_averages(map, bank, z, params.orbit, derive_seed(task_seed, 1));
    double worst = 0.0;
    for (std::size_t j = 0; j < bank.size(); ++j) {
      worst = std::max(worst, std::abs(out.averages[i][j] - out.reference[j]));
    }
    out.max_deviation[i] = worst;
  });
  const auto passing = std::count_if(out.max_deviation.begin(), out.max_deviation.end(),
                                     [&](double d) { return d <= params.eps; });
  out.fraction = static_cast<double>(passing) / static_cast<double>(params.samples);

  SweepReport& rep = out.report;
  rep.kind = "physicality";
  rep.params = {{"t", str(map.slope())},
                {"basin", basin_name(params.basin.kind)},
                {"samples", str(params.samples)},
                {"orbit", str(params.orbit)},
                {"eps", str(params.eps)},
                {"seed", str(params.seed)},
                {"reference_orbit", str(params.reference_orbit)},
                {"pass_fraction", str(params.pass_fraction)}};
  if (params.basin.kind == Basin::annulus) {
    rep.params.push_back({"s_min", str(params.basin.s_min)});
    rep.params.push_back({"s_max", str(params.basin.s_max)});
  }
  for (std::size_t j = 0; j < bank.size(); ++j) {
    rep.params.push_back({"observable_" + std::to_string(j), bank.items()[j].name});
    rep.stats.push_back({"reference_" + std::to_string(j), out.reference[j]});
  }
  rep.stats.push_back({"fraction_within_eps", out.fraction});
  rep.columns = {"sample", "y", "s", "max_deviation"};
  for (std::size_t j = 0; j < bank.size(); ++j) rep.columns.push_back("avg_" + std::to_string(j));
  for (std::size_t i = 0; i < params.samples; ++i) {
    std::vector<double> row{static_cast<double>(i), out.starts[i].y, out.starts[i].s, out.max_deviation[i]};
    row.insert(row.end(), out.averages[i].begin(), out.averages[i].end());
    rep.rows.push_back(std::move(row));
  }
  rep.checks = {{"fraction of samples within eps >= pass_fraction", out.fraction >= params.pass_fraction}};
  rep.runtimes = {{"reference", ref_time}, {"total", seconds_since(start)}};
  return out;
}

// ---------------------------------------------------------------------------
// Psi pushforward continuity

namespace {

// Largest radius materialized by psi in sweeps; m(s > cap) = (2/pi) arccot(cap).
constexpr double kPsiRadiusCap = 1048576.0;

double coordinate_distance(const DiskThread& a, const DiskThread& b) {
  double acc = 0.0, w = 1.0;
  for (std::size_t n = 0; n < a.z.size() && n < b.z.size(); ++n) {
    acc += plane_distance(a.z[n], b.z[n]) * w;
    w *= 0.5;
  }
  return acc;
}

}  // namespace

SweepReport psi_pushforward_continuity(const std::vector<double>& grid, double t_star, const ObservableBank& bank,
                                       const PsiContinuityParams& params) {
  check_grid(grid);
  const std::size_t ref = index_of(grid, t_star);
  if (params.depth < bank.coords()) throw DomainError("psi depth smaller than the observables' coordinate count");
  const auto start = Clock::now();
  // Common samples for every slope, drawn from m conditioned on s <= cap.
  std::vector<AnnulusPoint> pts;
  {
    std::mt19937_64 rng(params.seed);
    const double top = AnnulusMeasure::radial_cdf(kPsiRadiusCap);
    pts.reserve(params.samples);
    for (std::size_t i = 0; i < params.samples; ++i) {
      const double y = kTwoPi * uniform01(rng);
      const double s = std::tan(0.5 * kPi * top * uniform01(rng));
      pts.push_back({y, s});
    }
  }
  const std::size_t nb = bank.size();
  auto values_at = [&](double t, std::vector<double>& vals, std::vector<DiskThread>* keep) {
    const TentMap map(t);
    vals.assign(pts.size() * nb, 0.0);
    std::vector<double> coords(static_cast<std::size_t>(bank.coords()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      DiskThread th = psi(map, pts[i], params.depth);
      for (std::size_t c = 0; c < coords.size(); ++c) coords[c] = eta(th.z[c]).u;
      bank.evaluate(coords, std::span<double>(vals.data() + i * nb, nb));
      if (keep) keep->push_back(std::move(th));
    }
  };
  std::vector<double> ref_vals;
  std::vector<DiskThread> ref_threads;
  values_at(t_star, ref_vals, &ref_threads);

  struct Row {
    std::vector<double> mean_diff, se_diff;
    double pointwise_max = 0.0, pointwise_mean = 0.0;
  };
  std::vector<Row> rows(grid.size());
  parallel_for(grid.size(), params.workers, [&](std::size_t g) {
    std::vector<double> vals;
    std::vector<DiskThread> threads;
    values_at(grid[g], vals, &threads);
    Row& r = rows[g];
    r.mean_diff.assign(nb, 0.0);
    r.se_diff.assign(nb, 0.0);
    std::vector<double> sq(nb, 0.0);
    const double n = static_cast<double>(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = 0; j < nb; ++j) {
        const double d = vals[i * nb + j] - ref_vals[i * nb + j];
        r.mean_diff[j] += d;
        sq[j] += d * d;
      }
    }
    for (std::size_t j = 0; j < nb; ++j) {
      r.mean_diff[j] /= n;
      const double var = std::max(0.0, sq[j] / n - r.mean_diff[j] * r.mean_diff[j]);
      r.se_diff[j] = std::sqrt(var / std::max(n - 1.0, 1.0));
    }
    std::size_t counted = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].s > params.pointwise_s_cap) continue;
      const double d = coordinate_distance(threads[i], ref_threads[i]);
      r.pointwise_max = std::max(r.pointwise_max, d);
      r.pointwise_mean += d;
      ++counted;
    }
    if (counted) r.pointwise_mean /= static_cast<double>(counted);
  });

  SweepReport rep;
  rep.kind = "psi_pushforward_continuity";
  rep.params = {{"grid", join_grid(grid)},
                {"t_star", str(t_star)},
                {"depth", str(params.depth)},
                {"samples", str(params.samples)},
                {"seed", str(params.seed)},
                {"radius_cap", str(kPsiRadiusCap)},
                {"pointwise_s_cap", str(params.pointwise_s_cap)},
                {"near_radius", str(params.near_radius)},
                {"near_tol", str(params.near_tol)}};
  rep.columns = {"t", "dt", "pointwise_max", "pointwise_mean", "max_abs_integral_diff", "max_se_diff"};
  for (std::size_t j = 0; j < nb; ++j) rep.columns.push_back("integral_diff_" + std::to_string(j));
  bool near_ok = true;
  double near_worst = 0.0;
  std::vector<double> ts, pw;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const Row& r = rows[g];
    double worst = 0.0, worst_se = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      worst = std::max(worst, std::abs(r.mean_diff[j]));
      worst_se = std::max(worst_se, r.se_diff[j]);
    }
    const double dt = grid[g] - t_star;
    if (std::abs(dt) <= params.near_radius) {
      near_worst = std::max(near_worst, worst);
      if (worst > params.near_tol) near_ok = false;
    }
    ts.push_back(grid[g]);
    pw.push_back(r.pointwise_max);
    std::vector<double> row{grid[g], dt, r.pointwise_max, r.pointwise_mean, worst, worst_se};
    row.insert(row.end(), r.mean_diff.begin(), r.mean_diff.end());
    rep.rows.push_back(std::move(row));
  }
  const double slope = loglog_slope(ts, pw, t_star);
  rep.stats = {{"near_max_integral_diff", near_worst},
               {"loglog_slope_pointwise", slope},
               {"excluded_mass", 1.0 - AnnulusMeasure::radial_cdf(kPsiRadiusCap)}};
  for (std::size_t j = 0; j < nb; ++j) rep.params.push_back({"observable_" + std::to_string(j), bank.items()[j].name});
  rep.checks = {{"|int a dPsi_t*m - int a dPsi_t**m| <= near_tol for |t - t*| <= near_radius", near_ok}};
  if (grid.size() > 2) rep.checks.push_back({"pointwise deviation shrinks as t -> t* (log-log slope < 0)", slope < 0.0});
  (void)ref;
  rep.runtimes = {{"total", seconds_since(start)}};
  return rep;
}

// ---------------------------------------------------------------------------
// Psi conjugacy and bijectivity

SweepReport psi_conjugacy_check(const ConjugacyParams& params) {
  if (params.samples < 3) throw DomainError("conjugacy check needs at least 3 samples");
  if (params.depth < 2) throw DomainError("conjugacy check needs depth >= 2");
  const auto start = Clock::now();
  struct Result {
    double t, y, s, roundtrip, conjugacy;
  };
  std::vector<Result> res(params.samples);
  const double strata[3][2] = {{0.0, 0.5}, {0.5, 1.0}, {1.0, params.s_max}};
  parallel_for(params.samples, params.workers, [&](std::size_t i) {
    std::mt19937_64 rng(derive_seed(params.seed, i));
    const auto& band = strata[i % 3];
    const double t = 1.1 + 0.9 * uniform01(rng);
    const double y = wrap_angle(kTwoPi * uniform01(rng));
    const double s = band[0] + (band[1] - band[0]) * uniform01(rng);
    const TentMap map(t);
    const AnnulusPoint p{y, s};
    const DiskThread th = psi(map, p, params.depth);
    const AnnulusPoint back = psi_inverse(map, th);
    const double roundtrip = std::max(std::abs(wrap_angle(back.y - p.y)), std::abs(back.s - p.s));
    const DiskThread lhs = nat_ext_step(map, th);
    const DiskThread rhs = psi(map, annulus_shift(p), params.depth);
    res[i] = {t, y, s, roundtrip, thread_metric(lhs, rhs).distance};
  });
  SweepReport rep;
  rep.kind = "psi_check";
  const double bound = 1e-9 + std::ldexp(1.0, 2 - params.depth);
  rep.params = {{"samples", str(params.samples)},
                {"depth", str(params.depth)},
                {"seed", str(params.seed)},
                {"s_max", str(params.s_max)},
                {"t_range", "[1.1, 2]"},
                {"roundtrip_tol", "1e-09"},
                {"conjugacy_bound", str(bound)}};
  rep.columns = {"t", "y", "s", "roundtrip_error", "conjugacy_residual"};
  double worst_rt = 0.0, worst_conj = 0.0;
  double per_band[3] = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < res.size(); ++i) {
    const auto& r = res[i];
    worst_rt = std::max(worst_rt, r.roundtrip);
    worst_conj = std::max(worst_conj, r.conjugacy);
    per_band[i % 3] = std::max(per_band[i % 3], r.conjugacy);
    rep.rows.push_back({r.t, r.y, r.s, r.roundtrip, r.conjugacy});
  }
  rep.stats = {{"max_roundtrip_error", worst_rt},
               {"max_conjugacy_residual", worst_conj},
               {"max_conjugacy_s_0_half", per_band[0]},
               {"max_conjugacy_s_half_1", per_band[1]},
               {"max_conjugacy_s_1_smax", per_band[2]}};
  rep.checks = {{"psi_inverse(psi(p)) = p within 1e-9", worst_rt <= 1e-9},
                {"conjugacy residual <= 1e-9 + 2^(2-depth)", worst_conj <= bound}};
  rep.runtimes = {{"total", seconds_since(start)}};
  return rep;
}

}  // namespace tentlab
