#include "qcd/thresholds.hpp"

#include <array>
#include <cmath>
#include <string>

#include "qcd/errors.hpp"

namespace qcd {
namespace {

void check_delta_f(double delta_f, const char* who) {
  if (!(delta_f > 0.0 && delta_f < 1.0)) {
    throw InvalidParameter(std::string(who) + ": delta_f must lie in (0, 1)");
  }
}

void check_r(double r, const char* who) {
  if (!(r > 1.0) || !std::isfinite(r)) {
    throw InvalidParameter(std::string(who) + ": r must be finite and > 1");
  }
}

void check_n(std::int64_t n, const char* who) {
  if (n < 1) throw InvalidParameter(std::string(who) + ": n must be >= 1");
}

double tvt_offset(double delta_f, double r) { return std::log(zeta(r)) - std::log(delta_f); }

double glr_offset(double delta_f) { return 2.5 * (std::log(4.0) - std::log(delta_f)) + 11.0; }

double tvt_value(double offset, double r, std::int64_t n) noexcept {
  return offset + r * std::log(static_cast<double>(n));
}

double glr_value(double offset, std::int64_t n) noexcept {
  const double log_n = std::log(static_cast<double>(n));
  return 6.0 * std::log1p(log_n) + 3.75 * log_n + offset;
}

}  // namespace

double zeta(double r) {
  if (!(r > 1.0)) throw InvalidParameter("zeta: series diverges for r <= 1");
  if (std::isinf(r)) return 1.0;
  // Euler-Maclaurin: partial sum up to N-1, integral tail, then Bernoulli
  // corrections. With N = 64 the first omitted term is far below 1e-16.
  constexpr int kN = 64;
  constexpr std::array<double, 6> kBernoulliOverFactorial = {
      1.0 / 6.0 / 2.0,
      -1.0 / 30.0 / 24.0,
      1.0 / 42.0 / 720.0,
      -1.0 / 30.0 / 40320.0,
      5.0 / 66.0 / 3628800.0,
      -691.0 / 2730.0 / 479001600.0,
  };
  double sum = 0.0;
  for (int i = kN - 1; i >= 1; --i) sum += std::pow(static_cast<double>(i), -r);
  const double big_n = kN;
  double tail = std::pow(big_n, 1.0 - r) / (r - 1.0) + 0.5 * std::pow(big_n, -r);
  double rising = r;                         // r (r+1) ... (r + 2j - 2)
  double power = std::pow(big_n, -r - 1.0);  // N^{-(r + 2j - 1)}
  for (std::size_t j = 0; j < kBernoulliOverFactorial.size(); ++j) {
    tail += kBernoulliOverFactorial[j] * rising * power;
    rising *= (r + 2.0 * static_cast<double>(j) + 1.0) * (r + 2.0 * static_cast<double>(j) + 2.0);
    power /= big_n * big_n;
  }
  return sum + tail;
}

double threshold_beta_c(std::int64_t n, double delta_f, double r) {
  check_n(n, "threshold_beta_c");
  check_delta_f(delta_f, "threshold_beta_c");
  check_r(r, "threshold_beta_c");
  return tvt_value(tvt_offset(delta_f, r), r, n);
}

double threshold_beta_s(std::int64_t n, double delta_f, double r) {
  return threshold_beta_c(n, delta_f, r) + std::log(static_cast<double>(n));
}

double threshold_beta_glr(std::int64_t n, double delta_f) {
  check_n(n, "threshold_beta_glr");
  check_delta_f(delta_f, "threshold_beta_glr");
  return glr_value(glr_offset(delta_f), n);
}

double threshold_beta_gsr(std::int64_t n, double delta_f) {
  return threshold_beta_glr(n, delta_f) + std::log(static_cast<double>(n));
}

std::string_view to_string(ThresholdKind kind) noexcept {
  switch (kind) {
    case ThresholdKind::constant_b: return "constant_b";
    case ThresholdKind::tvt_cusum: return "tvt_cusum";
    case ThresholdKind::tvt_sr: return "tvt_sr";
    case ThresholdKind::glr: return "glr";
    case ThresholdKind::gsr: return "gsr";
  }
  return "unknown";
}

ThresholdPolicy ThresholdPolicy::constant(double b) {
  if (std::isnan(b)) throw InvalidParameter("ThresholdPolicy::constant: b is NaN");
  return ThresholdPolicy(ThresholdKind::constant_b, b, 0.0, 0.0, 0.0);
}

ThresholdPolicy ThresholdPolicy::tvt_cusum(double delta_f, double r) {
  check_delta_f(delta_f, "ThresholdPolicy::tvt_cusum");
  check_r(r, "ThresholdPolicy::tvt_cusum");
  return ThresholdPolicy(ThresholdKind::tvt_cusum, 0.0, delta_f, r, tvt_offset(delta_f, r));
}

ThresholdPolicy ThresholdPolicy::tvt_sr(double delta_f, double r) {
  check_delta_f(delta_f, "ThresholdPolicy::tvt_sr");
  check_r(r, "ThresholdPolicy::tvt_sr");
  return ThresholdPolicy(ThresholdKind::tvt_sr, 0.0, delta_f, r, tvt_offset(delta_f, r));
}

ThresholdPolicy ThresholdPolicy::glr(double delta_f) {
  check_delta_f(delta_f, "ThresholdPolicy::glr");
  return ThresholdPolicy(ThresholdKind::glr, 0.0, delta_f, 0.0, glr_offset(delta_f));
}

ThresholdPolicy ThresholdPolicy::gsr(double delta_f) {
  check_delta_f(delta_f, "ThresholdPolicy::gsr");
  return ThresholdPolicy(ThresholdKind::gsr, 0.0, delta_f, 0.0, glr_offset(delta_f));
}

double ThresholdPolicy::operator()(std::int64_t n) const noexcept {
  switch (kind_) {
    case ThresholdKind::constant_b: return b_;
    case ThresholdKind::tvt_cusum: return tvt_value(offset_, r_, n);
    case ThresholdKind::tvt_sr: return tvt_value(offset_, r_, n) + std::log(static_cast<double>(n));
    case ThresholdKind::glr: return glr_value(offset_, n);
    case ThresholdKind::gsr: return glr_value(offset_, n) + std::log(static_cast<double>(n));
  }
  return b_;
}

}  // namespace qcd
