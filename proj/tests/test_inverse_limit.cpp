#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "tentlab/error.hpp"
#include "tentlab/inverse_limit.hpp"
#include "tentlab/stability.hpp"

using namespace tentlab;

namespace {

const double kSqrt2 = std::sqrt(2.0);

// Backward chain from x0 choosing a random preimage branch at every step.
Thread backward_thread(const TentMap& f, double x0, int depth, std::mt19937_64& rng) {
  Thread th{f.slope(), {x0}};
  while (th.depth() < depth) {
    const auto pre = preimage_points(f, th.x.back());
    th.x.push_back(pre[rng() % pre.size()]);
  }
  return th;
}

double max_entry_gap(const DiskThread& a, const DiskThread& b) {
  double worst = 0.0;
  for (std::size_t n = 0; n < a.z.size(); ++n) worst = std::max(worst, plane_distance(a.z[n], b.z[n]));
  return worst;
}

}  // namespace

TEST_CASE("nat_ext_step examples") {
  const TentMap f(1.7);
  const Thread th{1.7, {0.2, 0.5, -0.3}};
  const Thread up = nat_ext_step(f, th);
  REQUIRE(up.depth() == 3);
  CHECK(up.x[0] == f(0.2));
  CHECK(up.x[1] == 0.2);
  CHECK(up.x[2] == 0.5);

  const TentMap g(kSqrt2);
  const double p = 3.0 - 2.0 * kSqrt2;
  const Thread fixed{kSqrt2, std::vector<double>(6, p)};
  const Thread moved = nat_ext_step(g, fixed);
  for (double v : moved.x) CHECK(std::abs(v - p) <= 1e-12);

  CHECK_THROWS_AS(nat_ext_step(g, th), ShapeMismatch);
}

TEST_CASE("unstep after step recovers the thread") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    const TentMap f(1.1 + 0.9 * uniform01(rng));
    const Thread th = backward_thread(f, -1.0 + 2.0 * uniform01(rng), 10, rng);
    const double last = th.x.back();
    const auto pre = preimage_points(f, th.x[th.x.size() - 2]);
    const bool right = pre.size() == 1 || std::abs(pre.back() - last) <= std::abs(pre.front() - last);
    const Thread back = nat_ext_unstep(f, nat_ext_step(f, th), right);
    for (std::size_t n = 0; n < th.x.size(); ++n) REQUIRE(std::abs(back.x[n] - th.x[n]) <= 1e-12);
  }
}

TEST_CASE("thread metric examples") {
  const Thread a{1.5, {0.1, 0.2, 0.3}};
  CHECK(thread_metric(a, a).distance == 0.0);
  const Thread b{1.5, {0.2, 0.2, -0.1}};
  CHECK(thread_metric(a, b).distance == doctest::Approx(0.1 + 0.4 / 4.0));

  const Thread c{1.5, std::vector<double>(8, 0.0)};
  CHECK(thread_metric(c, c).tail_bound == 0x1.0p-6);

  CHECK_THROWS_AS(thread_metric(a, c), ShapeMismatch);
  CHECK_THROWS_AS(thread_metric(a, Thread{1.6, a.x}), ShapeMismatch);

  const DiskThread d{1.5, std::vector<CylinderPoint>(8, {0.0, 0.0})};
  CHECK(thread_metric(d, d).tail_bound == 0x1.0p-5);
}

TEST_CASE("threads sharing x0 contract by half per step") {
  std::mt19937_64 rng(42);
  const int depth = 16;
  for (int trial = 0; trial < 200; ++trial) {
    const TentMap f(1.1 + 0.9 * uniform01(rng));
    const double x0 = -1.0 + 2.0 * uniform01(rng);
    Thread a = backward_thread(f, x0, depth, rng);
    Thread b = backward_thread(f, x0, depth, rng);
    const double d0 = thread_metric(a, b).distance;
    for (int i = 1; i <= 6; ++i) {
      a = nat_ext_step(f, a);
      b = nat_ext_step(f, b);
      const ThreadDistance di = thread_metric(a, b);
      // Entries kept after i steps are the original n < depth - i.
      double kept = 0.0;
      for (int n = 0; n < depth - i; ++n) kept += std::abs(a.x[n + i] - b.x[n + i]) * std::ldexp(1.0, -n);
      REQUIRE(di.distance == doctest::Approx(std::ldexp(kept, -i)).epsilon(1e-14));
      const double lost = std::ldexp(d0, -i) - di.distance;
      REQUIRE(lost >= -1e-15);
      REQUIRE(lost <= std::ldexp(2.0 * std::ldexp(2.0, -(depth - i)), -i) + 1e-15);
    }
  }
}

TEST_CASE("psi examples") {
  const TentMap f(1.7);
  auto th = psi(f, {0.9, 0.5}, 3);
  REQUIRE(th.depth() == 3);
  CHECK(th.z[0].s == 0.5);
  CHECK(th.z[1].s == 0.25);
  CHECK(th.z[2].s == 0.125);
  CHECK(th.z[2].y == 0.9);

  th = psi(f, {0.9, 2.3}, 6);
  CHECK(th.z[0].s == 1.0);
  CHECK(std::cos(th.z[0].y) == doctest::Approx(f(std::cos(0.9))).epsilon(1e-12));
  CHECK(std::cos(th.z[1].y) == doctest::Approx(std::cos(0.9)).epsilon(1e-12));
  CHECK(th.z[2].s == doctest::Approx(0.65));
  CHECK(th.z[3].s == doctest::Approx(0.325));
  CHECK(th.z[2].y == 0.9);

  std::mt19937_64 rng(43);
  for (int i = 0; i < 500; ++i) {
    const AnnulusPoint p{kTwoPi * uniform01(rng), 8.0 * uniform01(rng)};
    const DiskThread d = psi(f, p, 12);
    CHECK(std::any_of(d.z.begin(), d.z.end(), [](const CylinderPoint& z) { return z.s < 1.0; }));
    CHECK(d.residual() <= 1e-9);
  }
}

TEST_CASE("psi_inverse examples and errors") {
  const TentMap f(1.7);
  auto p = psi_inverse(f, psi(f, {0.9, 0.5}, 5));
  CHECK(p.y == doctest::Approx(0.9));
  CHECK(p.s == 0.5);
  p = psi_inverse(f, psi(f, {0.9, 2.3}, 12));
  CHECK(p.y == doctest::Approx(0.9));
  CHECK(p.s == doctest::Approx(2.3).epsilon(1e-14));
  const DiskThread on_i{1.7, {interval_point(0.1), interval_point(0.2)}};
  CHECK_THROWS_AS(psi_inverse(f, on_i), AllOnIntervalError);
  // A head of 30 entries on I hides the annulus part at depth 12.
  CHECK_THROWS_AS(psi_inverse(f, psi(f, {0.1, 30.0}, 12)), AllOnIntervalError);
}

TEST_CASE("psi roundtrip on m-samples") {
  std::mt19937_64 rng(44);
  const auto pts = sample_m(45, 20000);
  double worst = 0.0;
  for (const auto& p : pts) {
    if (p.s >= 15.0) continue;  // head longer than depth 16 would be all on I
    const TentMap f(1.05 + 0.95 * uniform01(rng));
    const AnnulusPoint back = psi_inverse(f, psi(f, p, 16));
    worst = std::max(worst, std::abs(back.s - p.s));
    worst = std::max(worst, std::abs(wrap_angle(back.y - p.y)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("psi of psi_inverse reproduces disk threads off the attractor") {
  std::mt19937_64 rng(46);
  for (int i = 0; i < 2000; ++i) {
    const TentMap f(1.1 + 0.9 * uniform01(rng));
    const AnnulusPoint p{kTwoPi * uniform01(rng), 5.0 * uniform01(rng)};
    DiskThread th = psi(f, p, 12);
    for (int k = 0; k < 3; ++k) th = nat_ext_step(f, th);
    REQUIRE(max_entry_gap(psi(f, psi_inverse(f, th), 12), th) <= 1e-9);
  }
}

TEST_CASE("annulus_shift examples") {
  CHECK(annulus_shift({0.2, 0.3}).s == 0.6);
  CHECK(annulus_shift({0.2, 1.5}).s == 2.5);
  CHECK(annulus_shift({0.2, 1.0}).s == 2.0);
  CHECK(annulus_shift({0.2, std::nextafter(1.0, 2.0)}).s == doctest::Approx(2.0));
  CHECK(annulus_shift({0.2, 1.5}).y == 0.2);
}

TEST_CASE("background measure") {
  CHECK(AnnulusMeasure::total_mass() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(AnnulusMeasure::radial_cdf(1.0) == doctest::Approx(0.5));
  // Midpoint quadrature of the density over S x [0, 3].
  double acc = 0.0;
  const int m = 30000;
  for (int k = 0; k < m; ++k) acc += AnnulusMeasure::density(0.0, 3.0 * (k + 0.5) / m) * 3.0 / m;
  CHECK(acc * kTwoPi == doctest::Approx(AnnulusMeasure::radial_cdf(3.0)).epsilon(1e-8));
}

TEST_CASE("sample_m marginals") {
  const std::size_t n = 100000;
  auto pts = sample_m(47, n);
  std::vector<double> ys;
  std::size_t below_one = 0;
  for (const auto& p : pts) {
    REQUIRE(p.s >= 0.0);
    ys.push_back(p.y);
    if (p.s <= 1.0) ++below_one;
  }
  std::sort(ys.begin(), ys.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double cdf = ys[i] / kTwoPi;
    ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / n), std::abs(cdf - static_cast<double>(i + 1) / n)});
  }
  CHECK(ks <= 0.01);
  const double frac = static_cast<double>(below_one) / n;
  CHECK(std::abs(frac - 0.5) <= 3.0 * std::sqrt(0.25 / n));

  const auto again = sample_m(47, n);
  for (std::size_t i = 0; i < n; ++i) REQUIRE((again[i].y == pts[i].y && again[i].s == pts[i].s));
  CHECK_THROWS_AS(sample_m(1, 0), DomainError);
}

TEST_CASE("tilted rectangle membership and slices") {
  std::mt19937_64 rng(48);
  for (int i = 0; i < 200; ++i) {
    const TiltedRectangle r{-0.5 + uniform01(rng), 1.3 + 0.5 * uniform01(rng), 0.05 + 0.4 * uniform01(rng),
                            0.05 + 0.4 * uniform01(rng)};
    const double t = 1.1 + 0.9 * uniform01(rng);
    const Interval iv = r.slice_bounds(t);
    for (int k = 0; k < 200; ++k) {
      const double x = -1.5 + 3.0 * uniform01(rng);
      if (std::abs(x - iv.lo) < 1e-12 || std::abs(x - iv.hi) < 1e-12) continue;
      REQUIRE(r.contains(x, t) == (x > iv.lo && x < iv.hi));
    }
  }
}

TEST_CASE("tilted rectangle intersection") {
  std::mt19937_64 rng(49);
  for (int i = 0; i < 100; ++i) {
    auto rand_rect = [&] {
      return TiltedRectangle{-0.3 + 0.6 * uniform01(rng), 1.5 + 0.2 * uniform01(rng), 0.05 + 0.3 * uniform01(rng),
                             0.05 + 0.3 * uniform01(rng)};
    };
    const TiltedRectangle r1 = rand_rect(), r2 = rand_rect();
    const TiltedRectangle both = intersect(r1, r2);
    for (int k = 0; k < 300; ++k) {
      const double x = -1.0 + 2.0 * uniform01(rng), t = 1.1 + 0.9 * uniform01(rng);
      const bool want = r1.contains(x, t) && r2.contains(x, t);
      const bool got = !both.empty() && both.contains(x, t);
      if (want != got) {
        // Only allowed within rounding of an edge.
        const TiltedRectangle shrunk{both.x0, both.t0, both.a - 1e-12, both.b - 1e-12};
        const TiltedRectangle grown{both.x0, both.t0, both.a + 1e-12, both.b + 1e-12};
        REQUIRE(grown.contains(x, t) != shrunk.contains(x, t));
      }
    }
  }
  const TiltedRectangle far{0.9, 1.2, 0.01, 0.01}, other{-0.9, 1.9, 0.01, 0.01};
  CHECK(intersect(far, other).empty());
}

TEST_CASE("cylinder_reduce examples") {
  const TentMap f(1.8);
  const TiltedRectangle r1{0.2, 1.8, 0.3, 0.2}, r2{-0.4, 1.75, 0.4, 0.3};
  const auto one = cylinder_reduce(f, {{{3, r1}}});
  CHECK(one.n_k == 3);
  CHECK(one.slice.approx_equal(r1.slice(1.8), 0.0));

  const auto two = cylinder_reduce(f, {{{0, r1}, {2, r2}}});
  CHECK(two.n_k == 2);
  CHECK(two.slice.approx_equal(preimage_set(f, r1.slice(1.8), 2).intersect(r2.slice(1.8)), 1e-15));

  const auto swapped = cylinder_reduce(f, {{{2, r2}, {0, r1}}});
  CHECK(swapped.slice.approx_equal(two.slice, 1e-12));
  CHECK_THROWS_AS(cylinder_reduce(f, CylinderSet{}), DomainError);
}

TEST_CASE("cylinder_reduce boundary bound and associativity") {
  std::mt19937_64 rng(50);
  const auto sets = random_cylinder_sets(51, 200, 1.8, 6);
  for (const auto& set : sets) {
    const TentMap f(1.75 + 0.1 * uniform01(rng));
    const auto red = cylinder_reduce(f, set);
    CHECK(red.slice.boundary_count() <= (std::size_t{1} << (red.n_k + 1)) + 2 * set.terms.size());
    CylinderSet reversed = set;
    std::reverse(reversed.terms.begin(), reversed.terms.end());
    CHECK(cylinder_reduce(f, reversed).slice.approx_equal(red.slice, 1e-12));
    CHECK(cylinder_reduce(f, set.canonical()).slice.approx_equal(red.slice, 1e-12));
  }
}

TEST_CASE("cylinder membership on threads matches the reduced slice") {
  std::mt19937_64 rng(52);
  const auto sets = random_cylinder_sets(53, 50, 1.8, 4);
  const TentMap f(1.8);
  for (const auto& set : sets) {
    const auto red = cylinder_reduce(f, set);
    for (int k = 0; k < 200; ++k) {
      const Thread th = backward_thread(f, -1.0 + 2.0 * uniform01(rng), 6, rng);
      // x_{n_k} determines every lower entry by forward iteration.
      const double xk = th.x[static_cast<std::size_t>(red.n_k)];
      bool near_edge = false;
      for (double b : red.slice.boundary_points()) near_edge |= std::abs(b - xk) < 1e-9;
      if (near_edge) continue;
      REQUIRE(set.contains(th) == red.slice.contains(xk));
    }
  }
}

TEST_CASE("cylinder set file roundtrip and errors") {
  const CylinderSet set{{{0, {0.1, 1.8, 0.3, 0.2}}, {2, {-0.25, 1.79, 0.125, 0.5}}}};
  std::stringstream ss;
  write_cylinder_set(ss, set);
  const CylinderSet back = parse_cylinder_set(ss);
  REQUIRE(back.terms.size() == 2);
  CHECK(back.terms[1].n == 2);
  CHECK(back.terms[1].rect.x0 == -0.25);
  CHECK(back.terms[1].rect.b == 0.5);

  std::stringstream commented("# two terms\n[[term]]\nn = 1  # index\ncenter = [0, 1.8]\nhalf = [0.2, 0.2]\n");
  CHECK(parse_cylinder_set(commented).terms.size() == 1);

  auto fails_at = [](const std::string& text, const std::string& needle) {
    std::stringstream in(text);
    try {
      parse_cylinder_set(in);
    } catch (const ParseError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  CHECK(fails_at("n = 1\n", "line 1"));
  CHECK(fails_at("[[term]]\nn = 1\ncenter = [0, 1.8]\n", "line 1"));
  CHECK(fails_at("[[term]]\nn = -1\ncenter = [0, 1.8]\nhalf = [1, 1]\n", "line 2"));
  CHECK(fails_at("[[term]]\nn = 1\ncenter = [0 1.8]\nhalf = [1, 1]\n", "line 3"));
  CHECK(fails_at("[[term]]\nn = 1\ncenter = [0, 1.8]\nhalf = [1, 0]\n", "line 4"));
  CHECK(fails_at("[[term]]\nn = 1\nwidth = 3\n", "line 3"));
  CHECK(fails_at("", "term"));
}

TEST_CASE("thread sampler windows") {
  const TentMap f(1.83);
  ThreadSamplerParams p;
  p.orbit_length = 20000;
  p.depth = 9;
  p.burnin = 100;
  p.seed = 4;
  ThreadSampler a(f, p), b(f, p);
  Thread ta, tb, prev;
  std::int64_t count = 0;
  while (a.next(ta)) {
    REQUIRE(b.next(tb));
    REQUIRE(ta.x == tb.x);
    REQUIRE(ta.depth() == 9);
    REQUIRE(ta.residual() == 0.0);
    // Consecutive windows are one natural-extension step apart, up to dither.
    if (count > 0) REQUIRE(std::abs(ta.x[1] - prev.x[0]) <= 1e-9);
    prev = ta;
    ++count;
  }
  CHECK(count == a.capacity());
  CHECK(count == p.orbit_length - p.burnin - p.depth + 1);
  p.orbit_length = p.burnin + p.depth;
  CHECK_THROWS_AS(ThreadSampler(f, p), DomainError);
}

TEST_CASE("thread sampler head marginal at slope 2") {
  const TentMap f(2.0);
  ThreadSamplerParams p;
  p.seed = 5;
  ThreadSampler s(f, p);
  std::vector<double> counts(kDefaultBins, 0.0);
  const Density probe = Density::uniform(kDefaultBins);
  Thread th;
  while (s.next(th)) counts[probe.bin_of(th.x[0])] += 1.0;
  CHECK(wasserstein1(Density::from_masses(counts), probe) <= 5e-3);
}

TEST_CASE("cylinder_measure trivial cases") {
  const TentMap f(1.8);
  const Density acim = stationary_density(ulam_operator(f, 1024));
  ThreadSamplerParams p;
  p.orbit_length = 100000;
  const auto whole = cylinder_measure(f, {{{0, {0.0, 1.8, 5.0, 5.0}}}}, acim, p);
  CHECK(whole.exact == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(whole.mc == 1.0);
  const auto none = cylinder_measure(f, {{{1, {0.0, 1.2, 0.05, 0.05}}}}, acim, p);
  CHECK(none.exact == 0.0);
  CHECK(none.mc == 0.0);
  CHECK(none.samples == p.orbit_length - p.burnin - p.depth + 1);
}

TEST_CASE("exact and thread-frequency estimates agree on random sets") {
  const TentMap f(1.8);
  const Density acim = stationary_density(ulam_operator(f, kDefaultBins));
  const auto sets = random_cylinder_sets(54, 100, 1.8);
  const auto est = cylinder_measures(f, sets, acim, ThreadSamplerParams{});
  int agree = 0;
  for (const auto& e : est) {
    if (std::abs(e.exact - e.mc) <= 3.0 * e.mc_stderr || e.exact == e.mc) ++agree;
  }
  MESSAGE(agree << " of 100 sets agree within 3 standard errors");
  CHECK(agree >= 95);
}

TEST_CASE("threads csv layout") {
  std::stringstream ss;
  write_threads_csv(ss, {Thread{1.5, {0.25, -0.5}}}, {"hdr"});
  CHECK(ss.str() == "# hdr\nt,x0,x1\n1.5,0.25,-0.5\n");
}
