#include "qcd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "qcd/bounds.hpp"
#include "qcd/errors.hpp"

namespace qcd {
namespace {

// Runs body(i) for i in [0, count). Each index is independent, so the result
// is the same for any thread count and any scheduling.
template <class Body>
void parallel_for(std::int64_t count, unsigned threads, Body&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<std::int64_t>(
      std::min<std::int64_t>(static_cast<std::int64_t>(threads), std::max<std::int64_t>(count, 1)));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    constexpr std::int64_t kChunk = 64;
    for (;;) {
      const std::int64_t start = next.fetch_add(kChunk);
      if (start >= count) return;
      const std::int64_t stop = std::min(count, start + kChunk);
      try {
        for (std::int64_t i = start; i < stop; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (std::int64_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

DetectorSpec effective_spec(const ExperimentConfig& cfg) {
  DetectorSpec spec = cfg.detector;
  if (spec.window && spec.kind != DetectorKind::glr) spec.window.reset();
  return spec;
}

Detector make_detector(const DetectorSpec& spec, const ExperimentConfig& cfg) {
  if (uses_model(spec.kind)) return Detector(spec, cfg.model);
  return Detector(spec, std::nullopt);
}

RunOutcome run_trial_unchecked(const ExperimentConfig& cfg, const DetectorSpec& spec,
                               const NoiseSource& noise, std::optional<std::int64_t> change_point,
                               std::int64_t trial) {
  Detector detector = make_detector(spec, cfg);
  RandomStream rng(StreamKey{cfg.master_seed, static_cast<std::uint64_t>(trial), change_point,
                             StreamRole::observations});
  const GaussianPair& model = cfg.model;
  const auto stop = detector.run(
      [&](std::int64_t n) { return model.mean_at(n, change_point) + noise.sample(n, rng); },
      cfg.horizon);
  return RunOutcome{stop, change_point, cfg.horizon, trial};
}

NoiseSource noise_of(const ExperimentConfig& cfg) {
  return cfg.noise ? *cfg.noise : NoiseSource::gaussian(cfg.model.sigma2());
}

}  // namespace

std::vector<std::int64_t> default_change_points(std::int64_t prechange_window,
                                                std::int64_t horizon) {
  std::vector<std::int64_t> points;
  for (std::int64_t j = 0;; ++j) {
    const std::int64_t nu = prechange_window + 1 + (j * horizon) / 10;
    if (nu > horizon) break;
    if (points.empty() || points.back() != nu) points.push_back(nu);
  }
  return points;
}

std::vector<std::int64_t> resolved_change_points(const ExperimentConfig& cfg) {
  if (!cfg.change_points.empty()) return cfg.change_points;
  return default_change_points(cfg.prechange_window, cfg.horizon);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.horizon < 1) throw InvalidParameter("horizon T must be >= 1");
  if (cfg.trials < 1) throw InvalidParameter("trials must be >= 1");
  if (cfg.prechange_window < 0 || cfg.prechange_window >= cfg.horizon) {
    throw InvalidParameter("pre-change window m must lie in [0, T - 1]");
  }
  if (!(cfg.delta_d > 0.0 && cfg.delta_d < 1.0)) {
    throw InvalidParameter("delta_d must lie in (0, 1)");
  }
  for (const auto nu : cfg.change_points) {
    if (nu < cfg.prechange_window + 1 || nu > cfg.horizon) {
      throw InvalidParameter("change point " + std::to_string(nu) + " outside [m + 1, T] = [" +
                             std::to_string(cfg.prechange_window + 1) + ", " +
                             std::to_string(cfg.horizon) + "]");
    }
  }
  if (cfg.detector.kind == DetectorKind::gsr && cfg.horizon > kGsrHorizonCap &&
      !cfg.allow_expensive) {
    throw ExpensiveRunRefused("gsr costs O(T^2) per trial; T = " + std::to_string(cfg.horizon) +
                              " exceeds the default cap of " + std::to_string(kGsrHorizonCap) +
                              " (pass --allow-expensive to run anyway)");
  }
  // Builds (and discards) one detector so parameter errors surface up front.
  (void)make_detector(effective_spec(cfg), cfg);
}

RunOutcome run_trial(const ExperimentConfig& cfg, std::optional<std::int64_t> change_point,
                     std::int64_t trial) {
  if (cfg.horizon < 1) throw InvalidParameter("horizon T must be >= 1");
  if (change_point && (*change_point < 1 || *change_point > cfg.horizon)) {
    throw InvalidParameter("change point outside [1, T]");
  }
  return run_trial_unchecked(cfg, effective_spec(cfg), noise_of(cfg), change_point, trial);
}

FalseAlarmEstimate estimate_false_alarm(const ExperimentConfig& cfg, bool keep_outcomes) {
  validate(cfg);
  const DetectorSpec spec = effective_spec(cfg);
  const NoiseSource noise = noise_of(cfg);
  std::vector<RunOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
  parallel_for(cfg.trials, cfg.threads, [&](std::int64_t i) {
    outcomes[static_cast<std::size_t>(i)] = run_trial_unchecked(cfg, spec, noise, std::nullopt, i);
  });
  FalseAlarmEstimate est;
  est.trials = cfg.trials;
  est.alarms = std::count_if(outcomes.begin(), outcomes.end(), [&](const RunOutcome& o) {
    return o.stop_time && *o.stop_time <= cfg.horizon;
  });
  est.rate = static_cast<double>(est.alarms) / static_cast<double>(est.trials);
  est.std_error = std::sqrt(est.rate * (1.0 - est.rate) / static_cast<double>(est.trials));
  if (keep_outcomes) est.outcomes = std::move(outcomes);
  return est;
}

Delay nearest_rank_percentile(std::span<const Delay> sorted, double level) {
  if (sorted.empty()) throw InvalidParameter("nearest_rank_percentile: empty input");
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidParameter("nearest_rank_percentile: level must lie in (0, 1)");
  }
  const auto count = static_cast<double>(sorted.size());
  // The tiny relative guard absorbs representation error in level (0.99 * 100
  // must give rank 99, not 100).
  auto rank = static_cast<std::int64_t>(std::ceil(level * count * (1.0 - 1e-12)));
  rank = std::clamp<std::int64_t>(rank, 1, static_cast<std::int64_t>(sorted.size()));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

LatencyEstimate estimate_latency(const ExperimentConfig& cfg, bool keep_outcomes) {
  validate(cfg);
  const auto points = resolved_change_points(cfg);
  if (points.empty()) throw InvalidParameter("candidate change-point set is empty");
  const DetectorSpec spec = effective_spec(cfg);
  const NoiseSource noise = noise_of(cfg);

  LatencyEstimate est;
  est.trials = cfg.trials;
  est.seed = cfg.master_seed;
  est.empirical_latency = Delay(std::numeric_limits<std::int64_t>::min());
  for (const auto nu : points) {
    std::vector<RunOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
    parallel_for(cfg.trials, cfg.threads, [&](std::int64_t i) {
      outcomes[static_cast<std::size_t>(i)] = run_trial_unchecked(cfg, spec, noise, nu, i);
    });
    std::vector<Delay> delays;
    delays.reserve(outcomes.size());
    for (const auto& o : outcomes) delays.push_back(o.delay());
    std::sort(delays.begin(), delays.end());
    ChangePointLatency entry;
    entry.change_point = nu;
    entry.percentile = nearest_rank_percentile(delays, 1.0 - cfg.delta_d);
    if (keep_outcomes) entry.outcomes = std::move(outcomes);
    est.empirical_latency = std::max(est.empirical_latency, entry.percentile);
    est.per_change_point.push_back(std::move(entry));
  }
  return est;
}

ExperimentConfig config_at_horizon(const ExperimentConfig& base, std::int64_t horizon,
                                   const SweepOptions& options) {
  ExperimentConfig cfg = base;
  cfg.horizon = horizon;
  if (options.prechange_gap) cfg.prechange_window = std::max<std::int64_t>(0, horizon - *options.prechange_gap);
  if (!base.change_points.empty()) {
    std::erase_if(cfg.change_points, [&](std::int64_t nu) {
      return nu < cfg.prechange_window + 1 || nu > horizon;
    });
  }
  return cfg;
}

std::vector<HorizonRow> experiment_latency_vs_horizon(const ExperimentConfig& base,
                                                      std::span<const std::int64_t> horizons,
                                                      const SweepOptions& options) {
  std::vector<HorizonRow> rows;
  for (const auto horizon : horizons) {
    HorizonRow row;
    row.config = config_at_horizon(base, horizon, options);
    const ExperimentConfig& cfg = row.config;
    validate(cfg);

    const auto start = std::chrono::steady_clock::now();
    row.latency = estimate_latency(cfg, options.keep_outcomes);
    row.false_alarm = estimate_false_alarm(cfg, options.keep_outcomes);
    row.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    BoundQuery q;
    q.horizon = horizon;
    q.delta_f = cfg.detector.delta_f;
    q.delta_d = cfg.delta_d;
    q.r = cfg.detector.r;
    q.model = cfg.model;
    q.prechange_window = cfg.prechange_window;
    q.detector = cfg.detector.kind;
    if (cfg.model.change_gap() > 0.0 && cfg.detector.delta_f + cfg.delta_d < 1.0) {
      row.lower_bound = latency_lower_bound(q);
      switch (cfg.detector.kind) {
        case DetectorKind::tvt_cusum:
        case DetectorKind::tvt_sr: row.upper_bound = tvt_latency_upper_bound(q); break;
        case DetectorKind::glr:
        case DetectorKind::gsr:
          try {
            row.upper_bound = static_cast<double>(glr_latency_upper_bound(q));
          } catch (const PreconditionViolated&) {
            // window too short for the bound; leave it empty
          }
          break;
        default: break;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepPlan> figure1_preset(std::int64_t trials, std::uint64_t master_seed,
                                      unsigned threads) {
  ExperimentConfig base;
  base.model = GaussianPair(0.0, 1.0, 1.0);
  base.delta_d = 0.01;
  base.trials = trials;
  base.master_seed = master_seed;
  base.threads = threads;
  base.detector.delta_f = 0.01;
  base.detector.r = 2.0;
  base.detector.sigma2 = 1.0;

  std::vector<SweepPlan> plans;
  for (const auto kind : {DetectorKind::tvt_cusum, DetectorKind::tvt_sr}) {
    SweepPlan plan{base, {}};
    plan.base.detector.kind = kind;
    plans.push_back(plan);
  }
  SweepPlan glr{base, {}};
  glr.base.detector.kind = DetectorKind::glr;
  glr.base.detector.window = 700;
  glr.options.prechange_gap = 1000;
  plans.push_back(glr);
  return plans;
}

}  // namespace qcd
