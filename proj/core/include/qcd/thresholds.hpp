#pragma once

#include <cstdint>
#include <string_view>

namespace qcd {

/// Riemann zeta: sum_{i>=1} i^-r. Throws InvalidParameter for r <= 1.
double zeta(double r);

/// log(zeta(r) n^r / delta_f), the TVT-CuSum threshold.
double threshold_beta_c(std::int64_t n, double delta_f, double r);
/// threshold_beta_c(n, delta_f, r) + log n, the TVT-SR threshold (on log S_n).
double threshold_beta_s(std::int64_t n, double delta_f, double r);
/// 6 log(1 + log n) + (5/2) log(4 n^{3/2} / delta_f) + 11.
double threshold_beta_glr(std::int64_t n, double delta_f);
/// threshold_beta_glr(n, delta_f) + log n.
double threshold_beta_gsr(std::int64_t n, double delta_f);

enum class ThresholdKind { constant_b, tvt_cusum, tvt_sr, glr, gsr };

std::string_view to_string(ThresholdKind kind) noexcept;

/// A threshold schedule n -> beta(n). Parameters are validated once at
/// construction; the per-step evaluation is branch-light and allocation-free.
class ThresholdPolicy {
 public:
  /// Constant b. Any value, including +/-infinity, is accepted.
  static ThresholdPolicy constant(double b);
  static ThresholdPolicy tvt_cusum(double delta_f, double r);
  static ThresholdPolicy tvt_sr(double delta_f, double r);
  static ThresholdPolicy glr(double delta_f);
  static ThresholdPolicy gsr(double delta_f);

  double operator()(std::int64_t n) const noexcept;

  ThresholdKind kind() const noexcept { return kind_; }
  double b() const noexcept { return b_; }
  double delta_f() const noexcept { return delta_f_; }
  double r() const noexcept { return r_; }

 private:
  ThresholdPolicy(ThresholdKind kind, double b, double delta_f, double r, double offset) noexcept
      : kind_(kind), b_(b), delta_f_(delta_f), r_(r), offset_(offset) {}

  ThresholdKind kind_;
  double b_;
  double delta_f_;
  double r_;
  // log(zeta(r) / delta_f) for the TVT kinds, (5/2) log(4 / delta_f) + 11 for GLR/GSR.
  double offset_;
};

}  // namespace qcd
