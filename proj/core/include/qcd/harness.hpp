#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "qcd/detectors.hpp"
#include "qcd/models.hpp"

namespace qcd {

/// Detection delay tau - nu, extended with +infinity for "never stopped".
/// Negative values (a stop before the change) are kept as-is.
class Delay {
 public:
  constexpr explicit Delay(std::int64_t steps) noexcept : steps_(steps) {}
  static constexpr Delay never() noexcept { return Delay(kNever); }

  constexpr bool finite() const noexcept { return steps_ != kNever; }
  /// Only meaningful when finite().
  constexpr std::int64_t steps() const noexcept { return steps_; }

  friend constexpr auto operator<=>(Delay, Delay) noexcept = default;

 private:
  static constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();
  std::int64_t steps_;
};

/// GSR costs O(n) per step; runs beyond this horizon need allow_expensive.
inline constexpr std::int64_t kGsrHorizonCap = 20000;

/// One trial: where it stopped (if at all) relative to the change.
struct RunOutcome {
  std::optional<std::int64_t> stop_time;
  std::optional<std::int64_t> change_point;
  std::int64_t horizon = 0;
  std::int64_t trial = 0;

  /// stop_time - change_point; never() when the detector did not stop or when
  /// there was no change.
  Delay delay() const noexcept {
    if (!stop_time || !change_point) return Delay::never();
    return Delay(*stop_time - *change_point);
  }
};

struct ExperimentConfig {
  DetectorSpec detector;
  GaussianPair model{0.0, 1.0, 1.0};
  /// Observation noise; defaults to N(0, model.sigma2()).
  std::optional<NoiseSource> noise;
  std::int64_t horizon = 5000;
  /// Pre-change window m: change points start at m + 1.
  std::int64_t prechange_window = 0;
  double delta_d = 0.01;
  /// Trials per change point (and no-change trials for the false-alarm estimate).
  std::int64_t trials = 20000;
  /// Candidate change points; empty selects default_change_points(m, T).
  std::vector<std::int64_t> change_points;
  std::uint64_t master_seed = 1;
  /// Worker threads; 0 uses the hardware concurrency. Results never depend on it.
  unsigned threads = 1;
  bool allow_expensive = false;
};

/// {m + 1 + floor(j T / 10) : j = 0, 1, ...} intersected with [m + 1, T], without repeats.
std::vector<std::int64_t> default_change_points(std::int64_t prechange_window, std::int64_t horizon);
/// cfg.change_points, or the default set when empty.
std::vector<std::int64_t> resolved_change_points(const ExperimentConfig& cfg);

/// Throws InvalidParameter for inconsistent configs and ExpensiveRunRefused for
/// GSR beyond kGsrHorizonCap without allow_expensive.
void validate(const ExperimentConfig& cfg);

/// A fresh detector on the trajectory keyed by (master_seed, trial, change_point).
/// Trajectories do not depend on the detector, so different detectors on the
/// same key see the same observations.
RunOutcome run_trial(const ExperimentConfig& cfg, std::optional<std::int64_t> change_point,
                     std::int64_t trial);

struct FalseAlarmEstimate {
  double rate = 0.0;
  double std_error = 0.0;  // sqrt(rate (1 - rate) / trials)
  std::int64_t alarms = 0;
  std::int64_t trials = 0;
  std::vector<RunOutcome> outcomes;  // filled when requested
};

/// Fraction of cfg.trials no-change trials that stop within the horizon.
FalseAlarmEstimate estimate_false_alarm(const ExperimentConfig& cfg, bool keep_outcomes = false);

/// Element of 1-based rank ceil(level N) in an ascending sequence (never() sorts last).
/// Throws InvalidParameter for empty input or level outside (0, 1).
Delay nearest_rank_percentile(std::span<const Delay> sorted, double level);

struct ChangePointLatency {
  std::int64_t change_point = 0;
  Delay percentile{0};
  std::vector<RunOutcome> outcomes;  // filled when requested
};

struct LatencyEstimate {
  std::vector<ChangePointLatency> per_change_point;
  Delay empirical_latency{0};  // max over per_change_point percentiles
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
};

/// For each candidate nu: trials delays, their 100(1 - delta_d)th nearest-rank
/// percentile; the empirical latency is the maximum over nu.
LatencyEstimate estimate_latency(const ExperimentConfig& cfg, bool keep_outcomes = false);

struct SweepOptions {
  /// When set, m = T - prechange_gap at each horizon (GLR reproduction setup).
  std::optional<std::int64_t> prechange_gap;
  bool keep_outcomes = false;
};

/// One (detector, T) point of a latency-vs-horizon sweep.
struct HorizonRow {
  ExperimentConfig config;  // as run at this horizon
  LatencyEstimate latency;
  FalseAlarmEstimate false_alarm;
  std::optional<double> lower_bound;  // absent for a zero change gap
  std::optional<double> upper_bound;  // TVT bound; GLR/GSR bound when the window condition holds
  double wall_time_seconds = 0.0;
};

/// The config actually run at `horizon` (m, change points rederived).
ExperimentConfig config_at_horizon(const ExperimentConfig& base, std::int64_t horizon,
                                   const SweepOptions& options);

std::vector<HorizonRow> experiment_latency_vs_horizon(const ExperimentConfig& base,
                                                      std::span<const std::int64_t> horizons,
                                                      const SweepOptions& options = {});

struct SweepPlan {
  ExperimentConfig base;
  SweepOptions options;
};

/// The reference sweep ("figure1"): N(0,1) -> N(1,1), delta_f = delta_d = 0.01,
/// TVT-CuSum and TVT-SR with r = 2, windowed GLR (W = 700) with m = T - 1000.
std::vector<SweepPlan> figure1_preset(std::int64_t trials, std::uint64_t master_seed,
                                      unsigned threads);
inline constexpr std::int64_t kFigure1Horizons[] = {5000, 10000, 20000, 50000, 100000};

}  // namespace qcd
