#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <type_traits>
#include <variant>

#include "qcd/models.hpp"
#include "qcd/split_scan.hpp"
#include "qcd/thresholds.hpp"

namespace qcd {

/// CuSum statistic C_n = max(C_{n-1}, 0) + llr_n, C_0 = 0.
class CusumState {
 public:
  double update(double llr) noexcept {
    c_ = std::max(c_, 0.0) + llr;
    ++n_;
    return c_;
  }
  double value() const noexcept { return c_; }
  std::int64_t count() const noexcept { return n_; }

 private:
  double c_ = 0.0;
  std::int64_t n_ = 0;
};

/// Shiryaev-Roberts statistic in the log domain: log S_n = log(S_{n-1} + 1) + llr_n,
/// with log S_0 = -inf.
class SrLogState {
 public:
  double update(double llr) noexcept {
    // log(exp(y) + 1), stable on both tails; y = -inf gives 0.
    const double y = log_s_;
    const double softplus = y > 0.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
    log_s_ = softplus + llr;
    ++n_;
    return log_s_;
  }
  double value() const noexcept { return log_s_; }
  std::int64_t count() const noexcept { return n_; }

 private:
  double log_s_ = -std::numeric_limits<double>::infinity();
  std::int64_t n_ = 0;
};

/// GLR statistic G_n = sup_{k in K_n} e_k over the split terms of SplitScan.
/// K_n = [max(1, n - window), n] when windowed, [1, n] otherwise.
class GlrState {
 public:
  GlrState(double sigma2, std::optional<std::int64_t> window);

  void push(double x) { scan_.push(x); }
  /// Requires count() >= 1. Always >= 0.
  double statistic() const noexcept { return scan_.max_term(first_split()); }
  /// statistic() >= level, evaluated with block pruning.
  bool reaches(double level) const noexcept { return scan_.any_term_reaches(first_split(), level); }

  std::int64_t count() const noexcept { return scan_.count(); }
  std::optional<std::int64_t> window() const noexcept { return window_; }
  const SplitScan& scan() const noexcept { return scan_; }

 private:
  std::int64_t first_split() const noexcept {
    return window_ ? std::max<std::int64_t>(1, scan_.count() - *window_) : 1;
  }

  SplitScan scan_;
  std::optional<std::int64_t> window_;
};

/// Generalized Shiryaev-Roberts statistic log W_n = log sum_{k=1}^{n} exp(e_k).
class GsrState {
 public:
  explicit GsrState(double sigma2) : scan_(sigma2) {}

  void push(double x) { scan_.push(x); }
  /// Requires count() >= 1. O(n).
  double log_statistic() const { return scan_.log_sum_exp_terms(); }
  /// log_statistic() >= level. Since log W_n <= log n + max_k e_k, the exact
  /// sum is only formed when the largest split term can reach level - log n.
  bool reaches(double level) const;

  std::int64_t count() const noexcept { return scan_.count(); }
  const SplitScan& scan() const noexcept { return scan_; }

 private:
  SplitScan scan_;
};

enum class DetectorKind { cusum, sr, tvt_cusum, tvt_sr, glr, gsr };

std::string_view to_string(DetectorKind kind) noexcept;
/// Accepts "cusum", "sr", "tvt-cusum", "tvt-sr", "glr", "gsr" (underscores also accepted).
DetectorKind parse_detector_kind(std::string_view text);
/// True for the kinds that need the pre-/post-change model (LLR based).
bool uses_model(DetectorKind kind) noexcept;

/// Everything needed to build a detector, apart from the model.
struct DetectorSpec {
  DetectorKind kind = DetectorKind::tvt_cusum;
  double delta_f = 0.01;
  double r = 2.0;
  /// Required for cusum/sr. For the other kinds it replaces the time-varying
  /// threshold by this constant (used to force deterministic stops).
  std::optional<double> constant_threshold;
  /// GLR only; absent means the full supremum over [1, n].
  std::optional<std::int64_t> window;
  /// Variance (sub-Gaussian parameter) for GLR/GSR.
  double sigma2 = 1.0;
};

/// The threshold schedule implied by a spec.
ThresholdPolicy make_policy(const DetectorSpec& spec);

struct StepReport {
  double statistic;
  double threshold;
  bool stopped;
};

/// One of the six detectors together with its threshold schedule. Stops at the
/// first n with statistic(n) >= threshold(n); stepping a stopped detector throws
/// DetectorStateError.
class Detector {
 public:
  /// cusum/sr/tvt-cusum/tvt-sr need `model`; glr/gsr reject it (they see raw
  /// observations and use spec.sigma2).
  Detector(const DetectorSpec& spec, std::optional<GaussianPair> model);

  /// Consumes one observation and reports the updated statistic.
  StepReport step(double x);
  /// Same stopping decision as step(x).stopped, without forming the full
  /// statistic when it provably stays below the threshold.
  bool advance(double x);

  /// Feeds next(n) for n = count()+1, ..., horizon until the detector stops.
  /// Returns the stopping time, or nullopt if the horizon is reached first.
  template <class Source>
  std::optional<std::int64_t> run(Source&& next, std::int64_t horizon);

  DetectorKind kind() const noexcept { return kind_; }
  const ThresholdPolicy& policy() const noexcept { return policy_; }
  std::int64_t count() const noexcept { return n_; }
  bool stopped() const noexcept { return stopped_; }

 private:
  using State = std::variant<CusumState, SrLogState, GlrState, GsrState>;

  void ensure_running() const;

  template <class S>
  bool advance_state(S& state, double x);

  DetectorKind kind_;
  ThresholdPolicy policy_;
  std::optional<GaussianPair> model_;
  double llr_slope_ = 0.0;
  double llr_mid_ = 0.0;
  State state_;
  std::int64_t n_ = 0;
  bool stopped_ = false;
};

template <class S>
bool Detector::advance_state(S& state, double x) {
  ++n_;
  const double threshold = policy_(n_);
  bool hit = false;
  if constexpr (std::is_same_v<S, CusumState> || std::is_same_v<S, SrLogState>) {
    hit = state.update(llr_slope_ * (x - llr_mid_)) >= threshold;
  } else {
    state.push(x);
    hit = state.reaches(threshold);
  }
  stopped_ = hit;
  return hit;
}

template <class Source>
std::optional<std::int64_t> Detector::run(Source&& next, std::int64_t horizon) {
  ensure_running();
  return std::visit(
      [&](auto& state) -> std::optional<std::int64_t> {
        while (n_ < horizon) {
          if (advance_state(state, next(n_ + 1))) return n_;
        }
        return std::nullopt;
      },
      state_);
}

}  // namespace qcd
