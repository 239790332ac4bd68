#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tentlab/acim.hpp"
#include "tentlab/inverse_limit.hpp"

namespace tentlab {

/// Observable on a truncated thread, read through the first-coordinate plane
/// projection of each entry (which is x_n itself for entries on I).
struct Observable {
  std::string name;
  double lipschitz = 1.0;  // w.r.t. sum_n |x_n - y_n| / 2^n
  std::function<double(std::span<const double>)> fn;
};

class ObservableBank {
 public:
  /// x0, x0^2, cos(pi x0), x0 x1 and five quartic bumps (width 1/4) centred
  /// at -0.8, -0.4, 0, 0.4, 0.8.
  static ObservableBank standard();

  ObservableBank() = default;
  explicit ObservableBank(std::vector<Observable> items, int coords) : items_(std::move(items)), coords_(coords) {}

  /// Each observable divided by its Lipschitz constant.
  ObservableBank lipschitz_normalized() const;

  const std::vector<Observable>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  /// Number of leading thread coordinates the observables read.
  int coords() const { return coords_; }
  void evaluate(std::span<const double> coords, std::span<double> out) const;

 private:
  std::vector<Observable> items_;
  int coords_ = 2;
};

enum class Basin { interval, collar, annulus };

struct BasinSpec {
  Basin kind = Basin::collar;
  // Annulus basin only: m restricted to s in [s_min, s_max].
  double s_min = 0.0;
  double s_max = 1e300;
};

Basin parse_basin(const std::string& name);
std::string basin_name(Basin b);

/// Self-describing experiment output. `params` and `stats` go into both the
/// CSV header and the summary; runtimes only into the summary, so CSVs are
/// byte-reproducible.
struct SweepReport {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, double>> stats;
  std::vector<std::pair<std::string, bool>> checks;
  std::vector<std::pair<std::string, double>> runtimes;

  bool passed() const;
  double stat(const std::string& key) const;
  std::vector<double> column(const std::string& name) const;
  void write_csv(std::ostream& os) const;
  void write_summary(std::ostream& os) const;
};

/// Least-squares slope of log(dist) against log(1/|t - t*|) over points with
/// positive distance and t != t*. Negative when distances shrink toward t*.
double loglog_slope(std::span<const double> ts, std::span<const double> dists, double t_star);

/// Slopes t* - 2^-k and/or t* + 2^-k for k in [kmin, kmax], those in (1,2],
/// followed by t* itself.
std::vector<double> dyadic_grid(double t_star, int kmin, int kmax, bool below, bool above);

struct AcimSweepParams {
  std::size_t bins = kDefaultBins;
  double tol = kDefaultStationaryTol;
  int maxiter = kDefaultStationaryMaxIter;
  std::int64_t birkhoff_n = 1000000;
  std::int64_t burnin = 1000;
  std::uint64_t seed = 1;
  bool with_birkhoff = true;
  // Pass thresholds: W1 to the reference at |t - t*| <= near_radius.
  double near_radius = 0x1.0p-7;
  double near_w1 = 0.02;
  double estimator_swap = 1e-2;
  std::size_t workers = 1;
};

/// Per-slope acims by Ulam and Birkhoff, W1/L1 distances to t*, and the
/// log-log trend of the Ulam W1 distances.
SweepReport acim_sweep(const std::vector<double>& grid, double t_star, const AcimSweepParams& params);

struct CylinderContinuityParams {
  std::size_t bins = kDefaultBins;
  double tol = kDefaultStationaryTol;
  int maxiter = kDefaultStationaryMaxIter;
  ThreadSamplerParams sampler{};
  double near_radius = 0x1.0p-7;
  double near_tol = 0.02;
  double agreement_se = 3.0;
  std::size_t workers = 1;
};

/// Induced measures of each set across the grid: exact slice mass and thread
/// frequency at every slope (common seed), agreement of the two, and distance
/// to the value at t*. Sets whose slice at t* is empty are reported as
/// degenerate rather than failed.
SweepReport cylinder_continuity(const std::vector<CylinderSet>& sets, const std::vector<double>& grid,
                                double t_star, const CylinderContinuityParams& params);

/// Random cylinder sets for sweeps: 1-3 terms, indices 0..max_index, centres
/// with x0 in [-0.8, 0.8] and t0 within 0.05 of t_center, half-lengths in
/// [0.1, 0.5].
std::vector<CylinderSet> random_cylinder_sets(std::uint64_t seed, std::size_t count, double t_center,
                                              int max_index = 3);

struct PhysicalityParams {
  BasinSpec basin{};
  std::size_t samples = 500;
  std::int64_t orbit = 1000000;
  double eps = 0.01;
  std::uint64_t seed = 1;
  std::int64_t reference_orbit = 10000000;
  double pass_fraction = 0.99;
  std::size_t workers = 1;
};

struct PhysicalityReport {
  std::vector<double> reference;               // per observable
  std::vector<double> max_deviation;           // per sample, over the bank
  std::vector<std::vector<double>> averages;   // per sample, per observable
  std::vector<AnnulusPoint> starts;            // (y, s) of each sample (s = 1 on I)
  double fraction = 0.0;                       // share of samples with max_deviation <= eps
  SweepReport report;
};

/// Birkhoff averages of the bank along H_t orbits (disk basins) or natural
/// extension orbits of psi threads (annulus basin), compared with reference
/// integrals from a long thread-sampler run.
PhysicalityReport physicality_test(const TentMap& map, const ObservableBank& bank, const PhysicalityParams& params);

/// Space averages of the bank over thread-sampler windows.
std::vector<double> reference_integrals(const TentMap& map, const ObservableBank& bank, std::int64_t orbit,
                                        std::uint64_t seed);

/// Average over i = 1..n of the bank on the window (z_i, z_{i-1}) of the
/// H_t-orbit of z_0 = start. Once the orbit reaches I it continues as a
/// dithered f_t orbit.
std::vector<double> orbit_averages(const TentMap& map, const ObservableBank& bank, const CylinderPoint& start,
                                   std::int64_t n, std::uint64_t seed);

struct PsiContinuityParams {
  int depth = kDefaultDepth;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  double pointwise_s_cap = 6.0;  // pointwise deviation taken over samples with s <= cap
  double near_radius = 0x1.0p-7;
  double near_tol = 0.02;
  std::size_t workers = 1;
};

/// Integrals of the bank against (Psi_t)_* m with common samples across the
/// grid, plus pointwise thread deviations of Psi_t from Psi_{t*}.
SweepReport psi_pushforward_continuity(const std::vector<double>& grid, double t_star, const ObservableBank& bank,
                                       const PsiContinuityParams& params);

struct ConjugacyParams {
  std::size_t samples = 10000;
  int depth = kDefaultDepth;
  std::uint64_t seed = 7;
  double s_max = 6.0;
  std::size_t workers = 1;
};

/// Stratified check over s in [0,1/2), [1/2,1), [1,s_max) with random t in
/// (1,2]: psi_inverse(psi(p)) = p and thread distance between
/// nat_ext_step(psi(p)) and psi(annulus_shift(p)).
SweepReport psi_conjugacy_check(const ConjugacyParams& params);

}  // namespace tentlab
