#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/zeta.hpp>

#include "doctest.h"
#include "oracles.hpp"
#include "qcd/detectors.hpp"
#include "qcd/errors.hpp"
#include "qcd/random.hpp"
#include "qcd/thresholds.hpp"

using namespace qcd;
using doctest::Approx;

namespace {

std::vector<double> normal_draws(std::uint64_t seed, std::size_t n, double mean = 0.0,
                                 double scale = 1.0) {
  RandomStream rng(seed);
  std::vector<double> xs(n);
  for (auto& x : xs) x = mean + scale * rng.normal();
  return xs;
}

}  // namespace

TEST_CASE("CuSum update examples") {
  CusumState s;
  CHECK(s.update(0.7) == 0.7);
  CusumState t;
  t.update(-0.3);
  CHECK(t.update(0.5) == 0.5);
  CusumState u;
  for (double l : {1.0, -3.0, 2.0}) u.update(l);
  CHECK(u.value() == 2.0);
  CHECK(u.count() == 3);
}

TEST_CASE("CuSum recursion equals the supremum of suffix sums") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto llr = normal_draws(seed, 1 + seed * 3, -0.2, 1.5);
    CusumState s;
    for (std::size_t n = 0; n < llr.size(); ++n) {
      s.update(llr[n]);
      CHECK(std::abs(s.value() - oracle::cusum_sup_form(std::span(llr).first(n + 1))) <= 1e-9);
    }
  }
}

TEST_CASE("log-SR update examples") {
  SrLogState s;
  CHECK(s.update(0.7) == Approx(0.7).epsilon(1e-15));
  SrLogState t;
  t.update(0.2);
  CHECK(t.update(-0.1) == Approx(oracle::reference("log_sr_0.2_-0.1")).epsilon(1e-14));
  CHECK(t.value() == Approx(0.69813).epsilon(1e-5));
}

TEST_CASE("log-SR recursion equals the log of the sum form and dominates CuSum") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto llr = normal_draws(seed + 1000, 1 + seed * 2, -0.3, 1.0);
    SrLogState s;
    CusumState c;
    for (std::size_t n = 0; n < llr.size(); ++n) {
      s.update(llr[n]);
      c.update(llr[n]);
      const double ref = oracle::sr_sum_form(std::span(llr).first(n + 1));
      CHECK(std::abs(std::exp(s.value()) - ref) <= 1e-9 * ref);
      CHECK(s.value() >= c.value() - 1e-12);
    }
  }
}

TEST_CASE("log-SR stays finite for very large and very small ratios") {
  SrLogState s;
  for (int i = 0; i < 1000; ++i) s.update(50.0);
  CHECK(std::isfinite(s.value()));
  CHECK(s.value() == Approx(50000.0).epsilon(1e-12));
  SrLogState t;
  for (int i = 0; i < 1000; ++i) t.update(-50.0);
  CHECK(t.value() == Approx(-50.0).epsilon(1e-12));
}

TEST_CASE("zeta") {
  CHECK(zeta(2) == Approx(std::numbers::pi * std::numbers::pi / 6).epsilon(1e-14));
  CHECK(zeta(4) == Approx(std::pow(std::numbers::pi, 4) / 90).epsilon(1e-14));
  CHECK(zeta(2) == Approx(oracle::reference("zeta_2")).epsilon(1e-14));
  CHECK(zeta(4) == Approx(oracle::reference("zeta_4")).epsilon(1e-14));
  for (double r : {1.01, 1.5, 2.5, 3.0, 7.0, 30.0}) {
    CHECK(zeta(r) == Approx(boost::math::zeta(r)).epsilon(1e-12));
  }
  // Partial sum of 10^6 terms plus the integral tail estimate.
  double partial = 0.0;
  constexpr int kTerms = 1000000;
  for (int i = kTerms; i >= 1; --i) partial += 1.0 / (static_cast<double>(i) * i);
  partial += 1.0 / kTerms - 0.5 / (static_cast<double>(kTerms) * kTerms);
  CHECK(zeta(2) == Approx(partial).epsilon(1e-12));
  CHECK_THROWS_AS(zeta(1), InvalidParameter);
  CHECK_THROWS_AS(zeta(0.5), InvalidParameter);
}

TEST_CASE("threshold examples") {
  CHECK(threshold_beta_c(1, 0.01, 2) == Approx(oracle::reference("beta_c_1_0.01_2")).epsilon(1e-13));
  CHECK(threshold_beta_c(10, 0.01, 2) == Approx(oracle::reference("beta_c_10_0.01_2")).epsilon(1e-13));
  CHECK(threshold_beta_s(1, 0.01, 2) == threshold_beta_c(1, 0.01, 2));
  CHECK(threshold_beta_s(10, 0.01, 2) == Approx(oracle::reference("beta_s_10_0.01_2")).epsilon(1e-13));
  CHECK(threshold_beta_glr(1, 0.1) == Approx(oracle::reference("beta_glr_1_0.1")).epsilon(1e-13));
  CHECK(threshold_beta_glr(5000, 0.01) ==
        Approx(oracle::reference("beta_glr_5000_0.01")).epsilon(1e-13));
  CHECK(threshold_beta_gsr(1, 0.1) == threshold_beta_glr(1, 0.1));
  CHECK(threshold_beta_gsr(5000, 0.01) ==
        Approx(oracle::reference("beta_gsr_5000_0.01")).epsilon(1e-13));
  CHECK(std::abs(threshold_beta_glr(5000, 0.01) - 71.44) <= 0.01);
}

TEST_CASE("thresholds are increasing in n and the SR offsets are log n") {
  double prev_c = -1e300, prev_s = -1e300, prev_g = -1e300, prev_w = -1e300;
  for (std::int64_t n = 1; n <= 100000; n += (n < 100 ? 1 : 97)) {
    const double c = threshold_beta_c(n, 0.01, 2);
    const double s = threshold_beta_s(n, 0.01, 2);
    const double g = threshold_beta_glr(n, 0.01);
    const double w = threshold_beta_gsr(n, 0.01);
    CHECK(c > prev_c);
    CHECK(s > prev_s);
    CHECK(g > prev_g);
    CHECK(w > prev_w);
    CHECK(s - c == Approx(std::log(static_cast<double>(n))).epsilon(1e-12).scale(1.0));
    CHECK(w - g == Approx(std::log(static_cast<double>(n))).epsilon(1e-12).scale(1.0));
    prev_c = c;
    prev_s = s;
    prev_g = g;
    prev_w = w;
  }
}

TEST_CASE("threshold parameter errors") {
  CHECK_THROWS_AS(threshold_beta_c(0, 0.01, 2), InvalidParameter);
  CHECK_THROWS_AS(threshold_beta_c(1, 0.0, 2), InvalidParameter);
  CHECK_THROWS_AS(threshold_beta_c(1, 1.0, 2), InvalidParameter);
  CHECK_THROWS_AS(threshold_beta_c(1, 0.01, 1), InvalidParameter);
  CHECK_THROWS_AS(threshold_beta_s(1, -0.1, 2), InvalidParameter);
  CHECK_THROWS_AS(threshold_beta_glr(0, 0.01), InvalidParameter);
  CHECK_THROWS_AS(threshold_beta_gsr(1, 1.5), InvalidParameter);
  CHECK_THROWS_AS(ThresholdPolicy::tvt_cusum(0.01, 0.5), InvalidParameter);
}

TEST_CASE("threshold policies evaluate exactly the free functions") {
  const auto c = ThresholdPolicy::tvt_cusum(0.05, 2.5);
  const auto s = ThresholdPolicy::tvt_sr(0.05, 2.5);
  const auto g = ThresholdPolicy::glr(0.02);
  const auto w = ThresholdPolicy::gsr(0.02);
  for (std::int64_t n : {1, 2, 3, 10, 999, 123456}) {
    CHECK(c(n) == threshold_beta_c(n, 0.05, 2.5));
    CHECK(s(n) == threshold_beta_s(n, 0.05, 2.5));
    CHECK(g(n) == threshold_beta_glr(n, 0.02));
    CHECK(w(n) == threshold_beta_gsr(n, 0.02));
  }
  CHECK(ThresholdPolicy::constant(3.5)(17) == 3.5);
  CHECK(ThresholdPolicy::constant(-INFINITY)(1) == -INFINITY);
}

TEST_CASE("GLR statistic examples") {
  GlrState flat(1.0, std::nullopt);
  for (int i = 0; i < 10; ++i) flat.push(3.25);
  CHECK(flat.statistic() == 0.0);

  GlrState g(1.0, std::nullopt);
  for (double x : {0.0, 0.0, 2.0, 2.0}) g.push(x);
  CHECK(g.statistic() == Approx(oracle::reference("glr_0022")).epsilon(1e-14));
  CHECK(g.scan().term(2) == Approx(2.0).epsilon(1e-14));
  CHECK(g.scan().term(4) == 0.0);
  CHECK(g.scan().term(1) == Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(g.scan().term(3) == Approx(2.0 / 3.0).epsilon(1e-14));

  GlrState one(1.0, std::nullopt);
  one.push(-7.0);
  CHECK(one.statistic() == 0.0);
}

TEST_CASE("split terms equal the direct maximised likelihood ratio") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const std::size_t n = 1 + seed % 50;
    const double sigma2 = 0.25 + 0.1 * static_cast<double>(seed % 7);
    const auto xs = normal_draws(seed + 77, n, 1.0 * static_cast<double>(seed % 5), 2.0);
    SplitScan scan(sigma2);
    for (double x : xs) scan.push(x);
    for (std::size_t k = 1; k <= n; ++k) {
      CHECK(std::abs(scan.term(static_cast<std::int64_t>(k)) -
                     oracle::direct_mle_log_ratio(xs, k, sigma2)) <= 1e-9);
      CHECK(scan.term(static_cast<std::int64_t>(k)) >= 0.0);
    }
  }
}

TEST_CASE("GLR: brute-force agreement, non-negativity, windowing never increases") {
  const auto xs = normal_draws(5, 300, 0.0, 1.0);
  GlrState full(1.0, std::nullopt);
  GlrState win(1.0, 40);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    full.push(xs[n]);
    win.push(xs[n]);
    CHECK(full.statistic() >= 0.0);
    CHECK(win.statistic() <= full.statistic());
    if (n % 37 == 0) {
      const auto prefix = std::span(xs).first(n + 1);
      CHECK(std::abs(full.statistic() - oracle::glr_brute_force(prefix, 1.0)) <= 1e-9);
      const std::size_t lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(n + 1) - 40);
      CHECK(std::abs(win.statistic() - oracle::glr_brute_force(prefix, 1.0, lo)) <= 1e-9);
    }
  }
  CHECK_THROWS_AS(GlrState(1.0, 0), InvalidParameter);
}

TEST_CASE("pruned threshold test agrees with the exact maximum") {
  // Levels are placed on and around the exact maximum to stress the certificate.
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const double offset = seed % 3 == 0 ? 1e4 : (seed % 3 == 1 ? -37.5 : 0.0);
    const double jump = seed % 2 == 0 ? 0.8 : 0.0;
    RandomStream rng(seed * 31);
    SplitScan scan(1.0);
    for (std::int64_t n = 1; n <= 700; ++n) {
      scan.push(offset + (n > 350 ? jump : 0.0) + rng.normal());
      for (std::int64_t lo : {std::int64_t{1}, std::max<std::int64_t>(1, n - 100), n}) {
        const double exact = scan.max_term(lo);
        for (double level : {exact - 1e-6, exact, std::nextafter(exact, 1e300), exact + 1e-6,
                             exact * 0.5, exact + 1.0, 0.0, -1.0}) {
          REQUIRE(scan.any_term_reaches(lo, level) == (exact >= level));
        }
      }
    }
  }
}

TEST_CASE("pruned threshold test on long streams") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    RandomStream rng(seed * 101);
    SplitScan scan(1.0);
    const double offset = seed == 2 ? 250.0 : 0.0;
    for (std::int64_t n = 1; n <= 9000; ++n) {
      scan.push(offset + (n > 6000 && seed != 3 ? 0.3 : 0.0) + rng.normal());
      const bool boundary = n % 512 <= 2 || n % 512 >= 510;
      if (!boundary && n % 211 != 0) continue;
      for (std::int64_t lo : {std::int64_t{1}, std::max<std::int64_t>(1, n - 700), std::int64_t{4097}}) {
        if (lo > n) continue;
        const double exact = scan.max_term(lo);
        for (double level : {exact, std::nextafter(exact, 1e300), exact - 1e-6, exact + 0.5}) {
          REQUIRE(scan.any_term_reaches(lo, level) == (exact >= level));
        }
      }
    }
  }
}

TEST_CASE("GSR statistic examples and relations") {
  GsrState one(1.0);
  one.push(4.0);
  CHECK(one.log_statistic() == 0.0);

  GsrState g(1.0);
  for (double x : {0.0, 0.0, 2.0, 2.0}) g.push(x);
  CHECK(g.log_statistic() == Approx(oracle::reference("gsr_0022")).epsilon(1e-14));
  const double expected = std::log(2 * std::exp(2.0 / 3.0) + std::exp(2.0) + 1.0);
  CHECK(g.log_statistic() == Approx(expected).epsilon(1e-14));

  const auto xs = normal_draws(9, 200, 0.5, 1.3);
  GsrState w(1.69);
  GlrState l(1.69, std::nullopt);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    w.push(xs[n]);
    l.push(xs[n]);
    CHECK(w.log_statistic() >= l.statistic());
    CHECK(w.log_statistic() <= l.statistic() + std::log(static_cast<double>(n + 1)) + 1e-12);
    if (n % 23 == 0) {
      const auto prefix = std::span(xs).first(n + 1);
      CHECK(w.log_statistic() == Approx(oracle::gsr_brute_force(prefix, 1.69)).epsilon(1e-11));
    }
    const double exact = w.log_statistic();
    for (double level : {exact - 1e-7, exact, exact + 1e-7, exact - 3.0}) {
      CHECK(w.reaches(level) == (exact >= level));
    }
  }
}

TEST_CASE("detector kind names round-trip") {
  for (auto kind : {DetectorKind::cusum, DetectorKind::sr, DetectorKind::tvt_cusum,
                    DetectorKind::tvt_sr, DetectorKind::glr, DetectorKind::gsr}) {
    CHECK(parse_detector_kind(to_string(kind)) == kind);
  }
  CHECK(parse_detector_kind("tvt_sr") == DetectorKind::tvt_sr);
  CHECK_THROWS_AS(parse_detector_kind("bocpd"), InvalidParameter);
  CHECK(uses_model(DetectorKind::tvt_sr));
  CHECK_FALSE(uses_model(DetectorKind::gsr));
}

TEST_CASE("detector step examples") {
  const GaussianPair model(0, 1, 1);
  Detector tvt({.kind = DetectorKind::tvt_cusum}, model);
  const auto first = tvt.step(0.9);
  CHECK(first.statistic == Approx(0.4));
  CHECK(first.threshold == threshold_beta_c(1, 0.01, 2));
  CHECK_FALSE(first.stopped);

  Detector cusum({.kind = DetectorKind::cusum, .constant_threshold = 0.0}, model);
  const auto hit = cusum.step(0.6);
  CHECK(hit.statistic == Approx(0.1));
  CHECK(hit.stopped);
  CHECK(cusum.count() == 1);
  CHECK_THROWS_AS(cusum.step(0.0), DetectorStateError);
  CHECK_THROWS_AS(cusum.advance(0.0), DetectorStateError);

  Detector glr({.kind = DetectorKind::glr, .constant_threshold = 1.9, .window = 3}, std::nullopt);
  std::vector<bool> stops;
  for (double x : {0.0, 0.0, 2.0, 2.0}) stops.push_back(glr.step(x).stopped);
  CHECK(stops == std::vector<bool>{false, false, false, true});
  CHECK(glr.count() == 4);
}

TEST_CASE("detector construction errors") {
  const GaussianPair model(0, 1, 1);
  CHECK_THROWS_AS(Detector({.kind = DetectorKind::cusum}, model), InvalidParameter);
  CHECK_THROWS_AS(Detector({.kind = DetectorKind::tvt_sr}, std::nullopt), InvalidParameter);
  CHECK_THROWS_AS(Detector({.kind = DetectorKind::glr}, model), InvalidParameter);
  CHECK_THROWS_AS(Detector({.kind = DetectorKind::gsr, .window = 5}, std::nullopt), InvalidParameter);
  CHECK_THROWS_AS(Detector({.kind = DetectorKind::tvt_cusum, .delta_f = 2.0}, model), InvalidParameter);
}

TEST_CASE("fast path and run() stop exactly where step() stops") {
  const GaussianPair model(0, 1, 1);
  const std::vector<DetectorSpec> specs = {
      {.kind = DetectorKind::tvt_cusum},
      {.kind = DetectorKind::tvt_sr},
      {.kind = DetectorKind::cusum, .constant_threshold = 6.0},
      {.kind = DetectorKind::sr, .constant_threshold = 7.0},
      {.kind = DetectorKind::glr, .window = 80},
      {.kind = DetectorKind::glr},
      {.kind = DetectorKind::gsr},
  };
  for (const auto& spec : specs) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      auto xs = normal_draws(seed * 13 + 1, 600);
      for (std::size_t i = 250; i < xs.size(); ++i) xs[i] += 1.0;
      const auto m = uses_model(spec.kind) ? std::optional(model) : std::nullopt;
      Detector a(spec, m), b(spec, m), c(spec, m);
      std::optional<std::int64_t> stop_a, stop_b;
      for (std::size_t i = 0; i < xs.size() && !stop_a; ++i) {
        if (a.step(xs[i]).stopped) stop_a = a.count();
      }
      for (std::size_t i = 0; i < xs.size() && !stop_b; ++i) {
        if (b.advance(xs[i])) stop_b = b.count();
      }
      const auto stop_c = c.run([&](std::int64_t n) { return xs[static_cast<std::size_t>(n - 1)]; },
                                static_cast<std::int64_t>(xs.size()));
      CAPTURE(to_string(spec.kind));
      CHECK(stop_a == stop_b);
      CHECK(stop_a == stop_c);
    }
  }
}

TEST_CASE("CuSum never stops after SR and GLR never after GSR on shared data") {
  const GaussianPair model(0, 1, 1);
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto xs = normal_draws(seed + 500, 800);
    if (seed % 2 == 0) {
      for (std::size_t i = 400; i < xs.size(); ++i) xs[i] += 1.0;
    }
    auto next = [&](std::int64_t n) { return xs[static_cast<std::size_t>(n - 1)]; };
    const auto horizon = static_cast<std::int64_t>(xs.size());
    const auto never = std::numeric_limits<std::int64_t>::max();
    const auto c = Detector({.kind = DetectorKind::tvt_cusum}, model).run(next, horizon);
    const auto s = Detector({.kind = DetectorKind::tvt_sr}, model).run(next, horizon);
    const auto g = Detector({.kind = DetectorKind::glr}, std::nullopt).run(next, horizon);
    const auto w = Detector({.kind = DetectorKind::gsr}, std::nullopt).run(next, horizon);
    CHECK(c.value_or(never) <= s.value_or(never));
    CHECK(g.value_or(never) <= w.value_or(never));
  }
}
