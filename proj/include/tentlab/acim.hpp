#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tentlab/tent_map.hpp"

namespace tentlab {

/// Piecewise-constant probability density on uniform bins over [-1,1].
class Density {
 public:
  Density() = default;
  /// Weights are density values (not bin masses). Throws DomainError on a
  /// negative weight or fewer than one bin.
  explicit Density(std::vector<double> weights);

  static Density uniform(std::size_t nbins);
  /// All mass in the bin containing x.
  static Density point_mass(std::size_t nbins, double x);
  /// Renormalizes nonnegative bin masses (any positive total) to a density.
  static Density from_masses(std::vector<double> masses);

  std::size_t nbins() const { return w_.size(); }
  double bin_width() const { return 2.0 / static_cast<double>(w_.size()); }
  double bin_left(std::size_t i) const { return -1.0 + bin_width() * static_cast<double>(i); }
  double bin_right(std::size_t i) const { return i + 1 == w_.size() ? 1.0 : bin_left(i + 1); }
  std::size_t bin_of(double x) const;

  const std::vector<double>& weights() const { return w_; }
  double operator[](std::size_t i) const { return w_[i]; }
  double integral() const;

  /// Mass of [lo,hi] integrating the piecewise-constant density exactly.
  double mass(double lo, double hi) const;
  double mean() const;
  /// Integral of g against the density, midpoint rule per bin.
  template <class F>
  double expect(F&& g) const {
    const double h = bin_width();
    double acc = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) acc += w_[i] * h * g(bin_left(i) + 0.5 * h);
    return acc;
  }

 private:
  std::vector<double> w_;
};

/// Row-stochastic Ulam discretization of the transfer operator, CSR layout.
struct UlamOperator {
  std::size_t nbins = 0;
  std::vector<std::size_t> row_start;  // size nbins + 1
  std::vector<std::size_t> col;
  std::vector<double> val;

  std::size_t row_nonzeros(std::size_t i) const { return row_start[i + 1] - row_start[i]; }
  double row_sum(std::size_t i) const;
  /// One step of the adjoint action on bin masses: out_j = sum_i p_i P_ij.
  void push_forward(const std::vector<double>& masses, std::vector<double>& out) const;
  Density push_forward(const Density& d) const;
};

UlamOperator ulam_operator(const TentMap& map, std::size_t nbins);

inline constexpr double kDefaultStationaryTol = 1e-10;
inline constexpr int kDefaultStationaryMaxIter = 100000;
inline constexpr std::size_t kDefaultBins = 4096;

struct StationaryResult {
  Density density;
  double residual = 0.0;  // L1 norm of P^T p - p at exit
  int iterations = 0;
};

/// Lazy power iteration p <- (p + pP)/2 with L1 renormalization. The lazy
/// step has the same fixed point and removes the -1 eigenvalue that appears
/// when f_t permutes a cycle of intervals (t <= sqrt 2).
StationaryResult stationary_solve(const UlamOperator& op, double tol = kDefaultStationaryTol,
                                  int maxiter = kDefaultStationaryMaxIter);
Density stationary_density(const UlamOperator& op, double tol = kDefaultStationaryTol,
                           int maxiter = kDefaultStationaryMaxIter);

struct BirkhoffParams {
  std::optional<double> x0;  // drawn uniformly on I from `seed` when absent
  std::int64_t n = 1000000;
  std::size_t nbins = kDefaultBins;
  std::int64_t burnin = 1000;
  std::uint64_t seed = 1;
};

/// Occupation histogram of iterates burnin..n-1 of a dithered orbit.
Density birkhoff_histogram(const TentMap& map, const BirkhoffParams& params);

/// Exact acim for parameters whose critical orbit is eventually periodic:
/// piecewise-constant on the partition cut by the critical orbit, found by a
/// direct solve of the Perron-Frobenius fixed-point system.
struct MarkovDensity {
  std::vector<double> cuts;    // partition points, ascending, from -1 to 1
  std::vector<double> values;  // density on [cuts[k], cuts[k+1]]

  double value_at(double x) const;
  Density resample(std::size_t nbins) const;
};

MarkovDensity markov_partition_density(const TentMap& map, int depth = 64, double tol = 1e-9);
Density markov_exact_density(const TentMap& map, std::size_t nbins = kDefaultBins);

/// L1 distance between the CDFs, integrated exactly over each bin.
double wasserstein1(const Density& a, const Density& b);
/// sum |a_i - b_i| * binwidth.
double l1_density_distance(const Density& a, const Density& b);

/// CSV with columns bin_left,bin_right,weight. `header` lines are written
/// first, each prefixed with "# ".
void write_density_csv(std::ostream& os, const Density& d,
                       const std::vector<std::string>& header = {});
Density read_density_csv(std::istream& is);

}  // namespace tentlab
