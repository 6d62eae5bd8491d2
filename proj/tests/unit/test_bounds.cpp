#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "qcd/bounds.hpp"
#include "qcd/errors.hpp"
#include "qcd/thresholds.hpp"

using namespace qcd;
using doctest::Approx;

namespace {

BoundQuery query(DetectorKind kind, std::int64_t horizon = 5000, double df = 0.01,
                 double dd = 0.01) {
  BoundQuery q;
  q.horizon = horizon;
  q.delta_f = df;
  q.delta_d = dd;
  q.detector = kind;
  return q;
}

}  // namespace

TEST_CASE("lower bound examples") {
  BoundQuery q = query(DetectorKind::tvt_cusum, 100000);
  CHECK(latency_lower_bound(q) ==
        Approx(oracle::reference("lower_bound_T1e5_0.01_0.01_K1")).epsilon(1e-13));
  CHECK(std::abs(latency_lower_bound(q) - 16.098) <= 0.001);
  CHECK(latency_lower_bound(100000, 0.01, 0.01, 4.0) == Approx(latency_lower_bound(q) / 4.0));
  q.delta_f = 0.4;
  q.delta_d = 0.6;
  CHECK_THROWS_AS(latency_lower_bound(q), InfeasibleLevels);
  q.delta_d = 0.7;
  CHECK_THROWS_AS(latency_lower_bound(q), InfeasibleLevels);
  q = query(DetectorKind::tvt_cusum);
  q.model = GaussianPair(1, 1, 1);
  CHECK_THROWS_AS(latency_lower_bound(q), DegenerateModel);
}

TEST_CASE("TVT upper bound agrees with a fine independent theta scan") {
  for (auto [kind, key] : {std::pair{DetectorKind::tvt_cusum, "tvt_cusum_upper_T5000_0.01_0.01_r2"},
                           std::pair{DetectorKind::tvt_sr, "tvt_sr_upper_T5000_0.01_0.01_r2"}}) {
    const double v = tvt_latency_upper_bound(query(kind));
    CHECK(std::abs(v - oracle::reference(key)) <= 1e-4 * oracle::reference(key));
  }
}

TEST_CASE("TVT objective is affine in log(1/delta_d) at fixed theta") {
  for (double theta : {0.1, 0.37, 0.8}) {
    auto at = [&](double dd) {
      auto q = query(DetectorKind::tvt_cusum);
      q.delta_d = dd;
      return tvt_bound_objective(q, theta);
    };
    const double a = at(0.1), b = at(0.01), c = at(0.001);
    CHECK(c - b == Approx(b - a).epsilon(1e-10));
    CHECK(b - a == Approx(std::log(10.0) / std::abs(cumulant_lambda(GaussianPair(0, 1, 1), theta))));
  }
}

TEST_CASE("optimizer beats every point of an independent uniform theta grid") {
  for (auto kind : {DetectorKind::tvt_cusum, DetectorKind::tvt_sr}) {
    for (std::int64_t horizon : {10, 5000, 1000000}) {
      for (double gap : {0.5, 1.0, 3.0}) {
        auto q = query(kind, horizon);
        q.model = GaussianPair(0, gap, 1.0);
        const auto opt = tvt_bound_optimum(q);
        CHECK(opt.theta >= 1e-4);
        CHECK(opt.theta <= 1 - 1e-4);
        for (int i = 0; i < 10000; ++i) {
          const double theta = 1e-4 + (1 - 2e-4) * i / 9999.0;
          REQUIRE(opt.value <= tvt_bound_objective(q, theta) * (1 + 1e-12));
        }
      }
    }
  }
}

TEST_CASE("lower bound sits below the TVT upper bounds") {
  for (std::int64_t horizon : {1000, 10000, 100000}) {
    for (auto kind : {DetectorKind::tvt_cusum, DetectorKind::tvt_sr}) {
      const auto q = query(kind, horizon);
      CHECK(latency_lower_bound(q) < tvt_latency_upper_bound(q));
    }
  }
}

TEST_CASE("upper bounds are monotone in T, delta_d and delta_f") {
  for (auto kind : {DetectorKind::tvt_cusum, DetectorKind::tvt_sr}) {
    double prev = 0.0;
    for (std::int64_t horizon : {10, 100, 1000, 5000, 20000, 100000, 1000000}) {
      const double v = tvt_latency_upper_bound(query(kind, horizon));
      CHECK(v >= prev);
      prev = v;
    }
    prev = 1e300;
    for (double dd : {0.001, 0.01, 0.05, 0.1, 0.3}) {
      const double v = tvt_latency_upper_bound(query(kind, 5000, 0.01, dd));
      CHECK(v <= prev);
      prev = v;
    }
    prev = 1e300;
    for (double df : {0.001, 0.01, 0.05, 0.1, 0.3}) {
      const double v = tvt_latency_upper_bound(query(kind, 5000, df, 0.01));
      CHECK(v <= prev);
      prev = v;
    }
  }
  for (auto kind : {DetectorKind::glr, DetectorKind::gsr}) {
    std::int64_t prev = 0;
    for (std::int64_t horizon : {10, 100, 1000, 5000, 20000, 100000}) {
      auto q = query(kind, horizon);
      q.prechange_window = 3000;
      const auto v = glr_latency_upper_bound(q);
      CHECK(v >= prev);
      prev = v;
    }
    prev = std::numeric_limits<std::int64_t>::max();
    for (double dd : {0.001, 0.01, 0.05, 0.1, 0.3}) {
      auto q = query(kind, 5000, 0.01, dd);
      q.prechange_window = 3000;
      const auto v = glr_latency_upper_bound(q);
      CHECK(v <= prev);
      prev = v;
    }
    prev = std::numeric_limits<std::int64_t>::max();
    for (double df : {0.001, 0.01, 0.05, 0.1, 0.3}) {
      auto q = query(kind, 5000, df, 0.01);
      q.prechange_window = 3000;
      const auto v = glr_latency_upper_bound(q);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("TVT upper bound grows like log T") {
  for (auto kind : {DetectorKind::tvt_cusum, DetectorKind::tvt_sr}) {
    const double a = tvt_latency_upper_bound(query(kind, 100000)) / std::log(1e5);
    const double b = tvt_latency_upper_bound(query(kind, 1000000)) / std::log(1e6);
    CHECK(std::abs(b / a - 1.0) <= 0.15);
  }
}

TEST_CASE("GLR window rules") {
  const auto glr = query(DetectorKind::glr);
  const auto gsr = query(DetectorKind::gsr);
  CHECK(glr_min_prechange_window(glr) == oracle::reference("glr_min_window_T5000_0.01_gap1"));
  CHECK(glr_min_prechange_window(gsr) == oracle::reference("gsr_min_window_T5000_0.01_gap1"));
  CHECK(corollary_m(glr) == oracle::reference("corollary_m_glr_T5000_0.01_gap1"));
  CHECK(corollary_m(gsr) == oracle::reference("corollary_m_gsr_T5000_0.01_gap1"));
  CHECK(corollary_m(glr) == static_cast<std::int64_t>(std::ceil(16 * threshold_beta_glr(5000, 0.01))));
  for (std::int64_t horizon : {10, 5000, 100000}) {
    for (double gap : {0.5, 1.0, 2.0}) {
      auto q = query(DetectorKind::glr, horizon);
      q.model = GaussianPair(0, gap, 1.5);
      const double scale = 8 * 1.5 * threshold_beta_glr(horizon, 0.01) / (gap * gap);
      CHECK(corollary_m(q) == static_cast<std::int64_t>(std::ceil(2 * scale)));
      CHECK(static_cast<double>(corollary_m(q)) > scale);
      q.prechange_window = corollary_m(q);
      CHECK_NOTHROW(glr_latency_upper_bound(q));
    }
  }
  auto q = query(DetectorKind::glr);
  q.model = GaussianPair(0, 0, 1);
  CHECK_THROWS_AS(glr_min_prechange_window(q), DegenerateModel);
  CHECK_THROWS_AS(corollary_m(q), DegenerateModel);
}

TEST_CASE("GLR latency upper bound") {
  auto q = query(DetectorKind::glr);
  q.prechange_window = 1143;
  CHECK(glr_latency_upper_bound(q) == oracle::reference("glr_upper_T5000_0.01_0.01_m1143"));
  const double beta = threshold_beta_glr(5000, 0.01);
  CHECK(glr_latency_upper_bound(q) ==
        static_cast<std::int64_t>(std::ceil(8 * 1143 * beta / (1143 - 8 * beta))));
  // As m grows the first term approaches 8 sigma2 beta / gap^2 from above.
  q.prechange_window = 100000000;
  CHECK(glr_latency_upper_bound(q) == static_cast<std::int64_t>(std::ceil(8 * beta)));
  q.prechange_window = 572;
  CHECK(glr_latency_upper_bound(q) > 100000);
  q.prechange_window = 571;
  CHECK_THROWS_AS(glr_latency_upper_bound(q), PreconditionViolated);
  q.prechange_window = 0;
  CHECK_THROWS_AS(glr_latency_upper_bound(q), PreconditionViolated);
  q.detector = DetectorKind::tvt_cusum;
  q.prechange_window = 5000;
  CHECK_THROWS_AS(glr_latency_upper_bound(q), InvalidParameter);
}

TEST_CASE("tabulated bounds reproduce the individual functions") {
  auto q = query(DetectorKind::tvt_cusum, 100000);
  q.prechange_window = 99000;
  const std::vector<DetectorKind> kinds = {DetectorKind::tvt_cusum, DetectorKind::tvt_sr,
                                           DetectorKind::glr, DetectorKind::gsr};
  const auto rows = tabulate_bounds(q, kinds);
  CHECK(rows.size() == 2 + 2 + 4 + 4);
  for (const auto& row : rows) {
    CHECK(row.detector == row.inputs.detector);
    if (row.bound == "lower_bound") CHECK(row.value == latency_lower_bound(row.inputs));
    if (row.bound == "tvt_upper_bound") CHECK(row.value == tvt_latency_upper_bound(row.inputs));
    if (row.bound == "glr_upper_bound") {
      CHECK(row.inputs.prechange_window == 99000);
      CHECK(row.value == static_cast<double>(glr_latency_upper_bound(row.inputs)));
    }
  }
  q.prechange_window = 10;
  for (const auto& row : tabulate_bounds(q, kinds)) {
    if (row.bound == "glr_upper_bound") CHECK(row.inputs.prechange_window == corollary_m(row.inputs));
  }
  q.delta_f = 0.6;
  q.delta_d = 0.6;
  CHECK_THROWS_AS(tabulate_bounds(q, kinds), InfeasibleLevels);
}

TEST_CASE("TVT bound parameter errors") {
  auto q = query(DetectorKind::tvt_cusum);
  q.model = GaussianPair(2, 2, 1);
  CHECK_THROWS_AS(tvt_latency_upper_bound(q), DegenerateModel);
  q = query(DetectorKind::glr);
  CHECK_THROWS_AS(tvt_latency_upper_bound(q), InvalidParameter);
  q = query(DetectorKind::tvt_sr);
  q.r = 1.0;
  CHECK_THROWS_AS(tvt_latency_upper_bound(q), InvalidParameter);
}
