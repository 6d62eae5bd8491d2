#include "qcd/detectors.hpp"

#include <string>

#include "qcd/errors.hpp"

namespace qcd {

GlrState::GlrState(double sigma2, std::optional<std::int64_t> window)
    : scan_(sigma2), window_(window) {
  if (window_ && *window_ < 1) throw InvalidParameter("GlrState: window must be >= 1");
}

bool GsrState::reaches(double level) const {
  const double log_n = std::log(static_cast<double>(scan_.count()));
  // Margin keeps the pruning a strict necessary condition under rounding.
  if (!scan_.any_term_reaches(1, level - log_n - 1e-9)) return false;
  return log_statistic() >= level;
}

std::string_view to_string(DetectorKind kind) noexcept {
  switch (kind) {
    case DetectorKind::cusum: return "cusum";
    case DetectorKind::sr: return "sr";
    case DetectorKind::tvt_cusum: return "tvt-cusum";
    case DetectorKind::tvt_sr: return "tvt-sr";
    case DetectorKind::glr: return "glr";
    case DetectorKind::gsr: return "gsr";
  }
  return "unknown";
}

DetectorKind parse_detector_kind(std::string_view text) {
  std::string key(text);
  for (auto& c : key) {
    if (c == '_') c = '-';
  }
  for (auto kind : {DetectorKind::cusum, DetectorKind::sr, DetectorKind::tvt_cusum,
                    DetectorKind::tvt_sr, DetectorKind::glr, DetectorKind::gsr}) {
    if (key == to_string(kind)) return kind;
  }
  throw InvalidParameter("unknown detector '" + std::string(text) +
                         "' (expected cusum, sr, tvt-cusum, tvt-sr, glr or gsr)");
}

bool uses_model(DetectorKind kind) noexcept {
  return kind == DetectorKind::cusum || kind == DetectorKind::sr ||
         kind == DetectorKind::tvt_cusum || kind == DetectorKind::tvt_sr;
}

ThresholdPolicy make_policy(const DetectorSpec& spec) {
  if (spec.constant_threshold) return ThresholdPolicy::constant(*spec.constant_threshold);
  switch (spec.kind) {
    case DetectorKind::cusum:
    case DetectorKind::sr:
      throw InvalidParameter(std::string(to_string(spec.kind)) +
                             " needs a constant threshold b");
    case DetectorKind::tvt_cusum: return ThresholdPolicy::tvt_cusum(spec.delta_f, spec.r);
    case DetectorKind::tvt_sr: return ThresholdPolicy::tvt_sr(spec.delta_f, spec.r);
    case DetectorKind::glr: return ThresholdPolicy::glr(spec.delta_f);
    case DetectorKind::gsr: return ThresholdPolicy::gsr(spec.delta_f);
  }
  throw InvalidParameter("unknown detector kind");
}

namespace {

std::variant<CusumState, SrLogState, GlrState, GsrState> make_state(const DetectorSpec& spec) {
  switch (spec.kind) {
    case DetectorKind::cusum:
    case DetectorKind::tvt_cusum: return CusumState{};
    case DetectorKind::sr:
    case DetectorKind::tvt_sr: return SrLogState{};
    case DetectorKind::glr: return GlrState(spec.sigma2, spec.window);
    case DetectorKind::gsr: return GsrState(spec.sigma2);
  }
  throw InvalidParameter("unknown detector kind");
}

}  // namespace

Detector::Detector(const DetectorSpec& spec, std::optional<GaussianPair> model)
    : kind_(spec.kind), policy_(make_policy(spec)), model_(model), state_(make_state(spec)) {
  if (uses_model(kind_)) {
    if (!model_) {
      throw InvalidParameter(std::string(to_string(kind_)) + " needs the pre/post-change model");
    }
    llr_slope_ = (model_->mu1() - model_->mu0()) / model_->sigma2();
    llr_mid_ = 0.5 * (model_->mu0() + model_->mu1());
  } else if (model_) {
    throw InvalidParameter(std::string(to_string(kind_)) +
                           " works on raw observations and takes no model");
  }
  if (spec.window && kind_ != DetectorKind::glr) {
    throw InvalidParameter("a window applies to glr only");
  }
}

void Detector::ensure_running() const {
  if (stopped_) {
    throw DetectorStateError(std::string(to_string(kind_)) + " already stopped at n = " +
                             std::to_string(n_));
  }
}

StepReport Detector::step(double x) {
  ensure_running();
  return std::visit(
      [&](auto& state) -> StepReport {
        using S = std::decay_t<decltype(state)>;
        ++n_;
        const double threshold = policy_(n_);
        double stat = 0.0;
        if constexpr (std::is_same_v<S, CusumState> || std::is_same_v<S, SrLogState>) {
          stat = state.update(llr_slope_ * (x - llr_mid_));
        } else if constexpr (std::is_same_v<S, GlrState>) {
          state.push(x);
          stat = state.statistic();
        } else {
          state.push(x);
          stat = state.log_statistic();
        }
        stopped_ = stat >= threshold;
        return StepReport{stat, threshold, stopped_};
      },
      state_);
}

bool Detector::advance(double x) {
  ensure_running();
  return std::visit([&](auto& state) { return advance_state(state, x); }, state_);
}

}  // namespace qcd
