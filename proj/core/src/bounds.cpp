#include "qcd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qcd/errors.hpp"
#include "qcd/thresholds.hpp"

namespace qcd {
namespace {

constexpr double kThetaLo = 1e-4;
constexpr double kThetaHi = 1.0 - 1e-4;
constexpr double kGridStep = 1e-3;

void check_levels(const BoundQuery& q) {
  if (!(q.delta_f > 0.0 && q.delta_f < 1.0) || !(q.delta_d > 0.0 && q.delta_d < 1.0)) {
    throw InvalidParameter("delta_f and delta_d must lie in (0, 1)");
  }
  if (q.horizon < 1) throw InvalidParameter("horizon T must be >= 1");
}

void check_gap(const BoundQuery& q, const char* who) {
  if (q.model.change_gap() == 0.0) {
    throw DegenerateModel(std::string(who) + ": change gap is zero");
  }
}

double tvt_beta(const BoundQuery& q) {
  switch (q.detector) {
    case DetectorKind::tvt_cusum: return threshold_beta_c(q.horizon, q.delta_f, q.r);
    case DetectorKind::tvt_sr: return threshold_beta_s(q.horizon, q.delta_f, q.r);
    default:
      throw InvalidParameter("TVT latency bound applies to tvt-cusum and tvt-sr only, got " +
                             std::string(to_string(q.detector)));
  }
}

double glr_beta(const BoundQuery& q) {
  switch (q.detector) {
    case DetectorKind::glr: return threshold_beta_glr(q.horizon, q.delta_f);
    case DetectorKind::gsr: return threshold_beta_gsr(q.horizon, q.delta_f);
    default:
      throw InvalidParameter("GLR/GSR bounds apply to glr and gsr only, got " +
                             std::string(to_string(q.detector)));
  }
}

// 8 sigma2 beta / gap^2: the window condition's right-hand side.
double window_scale(const BoundQuery& q) {
  const double gap = q.model.change_gap();
  return 8.0 * q.model.sigma2() * glr_beta(q) / (gap * gap);
}

}  // namespace

double latency_lower_bound(std::int64_t horizon, double delta_f, double delta_d, double k) {
  if (!(delta_f > 0.0 && delta_f < 1.0) || !(delta_d > 0.0 && delta_d < 1.0)) {
    throw InvalidParameter("delta_f and delta_d must lie in (0, 1)");
  }
  if (delta_f + delta_d >= 1.0) {
    throw InfeasibleLevels("infeasible levels: need delta_f + delta_d < 1");
  }
  if (horizon < 1) throw InvalidParameter("horizon T must be >= 1");
  if (!(k > 0.0)) throw DegenerateModel("latency_lower_bound: K must be > 0");
  return (std::log(static_cast<double>(horizon)) + std::log(1.0 / delta_f) +
          std::log(1.0 - delta_f - delta_d)) /
         k;
}

double latency_lower_bound(const BoundQuery& q) {
  return latency_lower_bound(q.horizon, q.delta_f, q.delta_d, info_const_k(q.model));
}

double tvt_bound_objective(const BoundQuery& q, double theta) {
  return (std::log(1.0 / q.delta_d) + theta * tvt_beta(q)) /
         std::abs(cumulant_lambda(q.model, theta));
}

ThetaOptimum tvt_bound_optimum(const BoundQuery& q) {
  check_levels(q);
  check_gap(q, "tvt_latency_upper_bound");
  const double beta = tvt_beta(q);
  const double log_inv_dd = std::log(1.0 / q.delta_d);
  auto objective = [&](double theta) {
    return (log_inv_dd + theta * beta) / std::abs(cumulant_lambda(q.model, theta));
  };

  double best_theta = kThetaLo;
  double best = objective(kThetaLo);
  const int steps = static_cast<int>(std::floor((kThetaHi - kThetaLo) / kGridStep));
  for (int i = 1; i <= steps + 1; ++i) {
    const double theta = std::min(kThetaLo + i * kGridStep, kThetaHi);
    const double v = objective(theta);
    if (v < best) {
      best = v;
      best_theta = theta;
    }
  }

  // Golden-section refinement on the bracket around the best grid point.
  double lo = std::max(kThetaLo, best_theta - kGridStep);
  double hi = std::min(kThetaHi, best_theta + kGridStep);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int iter = 0; iter < 200 && hi - lo > 1e-13; ++iter) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    }
  }
  for (const double theta : {x1, x2, 0.5 * (lo + hi)}) {
    const double v = objective(theta);
    if (v < best) {
      best = v;
      best_theta = theta;
    }
  }
  return ThetaOptimum{best_theta, best};
}

double tvt_latency_upper_bound(const BoundQuery& q) { return tvt_bound_optimum(q).value; }

std::int64_t glr_min_prechange_window(const BoundQuery& q) {
  check_levels(q);
  check_gap(q, "glr_min_prechange_window");
  return static_cast<std::int64_t>(std::ceil(window_scale(q)));
}

std::int64_t glr_latency_upper_bound(const BoundQuery& q) {
  check_levels(q);
  check_gap(q, "glr_latency_upper_bound");
  const double gap2 = q.model.change_gap() * q.model.change_gap();
  const double s8b = 8.0 * q.model.sigma2() * glr_beta(q);
  const double m = static_cast<double>(q.prechange_window);
  if (!(m > s8b / gap2)) {
    throw PreconditionViolated(
        "pre-change window too short: the GLR/GSR latency bound needs m > 8 sigma2 beta(T, "
        "delta_f) / gap^2 = " +
        std::to_string(s8b / gap2) + ", got m = " + std::to_string(q.prechange_window));
  }
  const double first = s8b * m / (gap2 * m - s8b);
  const double second =
      std::pow(q.delta_f, 2.0 / 3.0) / (std::pow(2.0, 16.0 / 15.0) * std::pow(q.delta_d, 4.0 / 15.0)) -
      m;
  return static_cast<std::int64_t>(std::ceil(std::max(first, second)));
}

std::int64_t corollary_m(const BoundQuery& q) {
  check_levels(q);
  check_gap(q, "corollary_m");
  return static_cast<std::int64_t>(std::ceil(2.0 * window_scale(q)));
}

std::vector<BoundRow> tabulate_bounds(const BoundQuery& q, std::span<const DetectorKind> kinds) {
  check_levels(q);
  if (q.delta_f + q.delta_d >= 1.0) {
    throw InfeasibleLevels("infeasible levels: need delta_f + delta_d < 1");
  }
  std::vector<BoundRow> rows;
  for (const DetectorKind kind : kinds) {
    BoundQuery k = q;
    k.detector = kind;
    rows.push_back({"lower_bound", kind, k, latency_lower_bound(k)});
    switch (kind) {
      case DetectorKind::tvt_cusum:
      case DetectorKind::tvt_sr:
        rows.push_back({"tvt_upper_bound", kind, k, tvt_latency_upper_bound(k)});
        break;
      case DetectorKind::glr:
      case DetectorKind::gsr: {
        const auto min_m = glr_min_prechange_window(k);
        const auto cor_m = corollary_m(k);
        rows.push_back({"min_prechange_window", kind, k, static_cast<double>(min_m)});
        rows.push_back({"corollary_m", kind, k, static_cast<double>(cor_m)});
        const double gap = k.model.change_gap();
        if (!(static_cast<double>(k.prechange_window) >
              8.0 * k.model.sigma2() * glr_beta(k) / (gap * gap))) {
          k.prechange_window = cor_m;
        }
        rows.push_back({"glr_upper_bound", kind, k, static_cast<double>(glr_latency_upper_bound(k))});
        break;
      }
      case DetectorKind::cusum:
      case DetectorKind::sr:
        break;  // constant-threshold tests carry no horizon-level guarantee
    }
  }
  return rows;
}

}  // namespace qcd
