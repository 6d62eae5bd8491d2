#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcd/detectors.hpp"
#include "qcd/models.hpp"

namespace qcd {

/// Inputs shared by the latency bounds. `detector` selects which threshold
/// family (beta_C / beta_S / beta_GLR / beta_GSR) enters a bound.
struct BoundQuery {
  std::int64_t horizon = 5000;
  double delta_f = 0.01;
  double delta_d = 0.01;
  double r = 2.0;
  GaussianPair model{0.0, 1.0, 1.0};
  std::int64_t prechange_window = 0;
  DetectorKind detector = DetectorKind::tvt_cusum;
};

/// Asymptotic lower bound on latency for any detector meeting the false-alarm
/// level: (1/K) [log T + log(1/delta_f) + log(1 - delta_f - delta_d)], with
/// the vanishing terms dropped. A reference curve, not a certified finite-T bound.
/// Throws InfeasibleLevels when delta_f + delta_d >= 1.
double latency_lower_bound(const BoundQuery& q);
double latency_lower_bound(std::int64_t horizon, double delta_f, double delta_d, double k);

/// [log(1/delta_d) + theta beta(T)] / |Lambda(theta)|.
double tvt_bound_objective(const BoundQuery& q, double theta);

struct ThetaOptimum {
  double theta;
  double value;
};

/// Minimises tvt_bound_objective over theta in [1e-4, 1 - 1e-4]: a 1e-3 grid,
/// then golden-section search inside the bracket around the best grid point.
ThetaOptimum tvt_bound_optimum(const BoundQuery& q);
/// Latency upper bound for TVT-CuSum / TVT-SR.
double tvt_latency_upper_bound(const BoundQuery& q);

/// Least m with m >= (8 sigma2 / gap^2) beta(T, delta_f) for GLR / GSR.
std::int64_t glr_min_prechange_window(const BoundQuery& q);
/// ceil(max{ 8 sigma2 m beta / (gap^2 m - 8 sigma2 beta),
///           delta_f^{2/3} / (2^{16/15} delta_d^{4/15}) - m }).
/// Requires m > 8 sigma2 beta / gap^2, else PreconditionViolated.
std::int64_t glr_latency_upper_bound(const BoundQuery& q);
/// ceil((16 sigma2 / gap^2) beta(T, delta_f)), the window giving O(log T) latency.
std::int64_t corollary_m(const BoundQuery& q);

/// One tabulated bound with the inputs it was evaluated at.
struct BoundRow {
  std::string bound;  // lower_bound, tvt_upper_bound, min_prechange_window, glr_upper_bound, corollary_m
  DetectorKind detector;
  BoundQuery inputs;
  double value;
};

/// Every bound applicable to each requested detector kind. The GLR/GSR latency
/// bound is evaluated at q.prechange_window when that satisfies the window
/// condition, otherwise at corollary_m. Throws InfeasibleLevels up front.
std::vector<BoundRow> tabulate_bounds(const BoundQuery& q, std::span<const DetectorKind> kinds);

}  // namespace qcd
