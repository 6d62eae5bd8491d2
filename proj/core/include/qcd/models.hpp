#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qcd/random.hpp"

namespace qcd {

/// Pre-/post-change Gaussian pair N(mu0, sigma2) -> N(mu1, sigma2).
class GaussianPair {
 public:
  /// Throws InvalidParameter unless sigma2 > 0 and all fields are finite.
  GaussianPair(double mu0, double mu1, double sigma2);

  double mu0() const noexcept { return mu0_; }
  double mu1() const noexcept { return mu1_; }
  double sigma2() const noexcept { return sigma2_; }
  /// |mu0 - mu1|.
  double change_gap() const noexcept;

  /// Mean of observation n (1-based) when the change happens at change_point.
  double mean_at(std::int64_t n, std::optional<std::int64_t> change_point) const noexcept {
    return (change_point && n >= *change_point) ? mu1_ : mu0_;
  }

  friend bool operator==(const GaussianPair&, const GaussianPair&) = default;

 private:
  double mu0_;
  double mu1_;
  double sigma2_;
};

/// log f1(x) - log f0(x) = ((mu1 - mu0) / sigma2) * (x - (mu0 + mu1) / 2).
inline double log_likelihood_ratio(const GaussianPair& model, double x) noexcept {
  return (model.mu1() - model.mu0()) / model.sigma2() * (x - 0.5 * (model.mu0() + model.mu1()));
}

/// K = log E_{f1}[f1(X)/f0(X)], equal to gap^2 / sigma2 for the Gaussian pair.
/// Throws DegenerateModel when the gap is zero.
double info_const_k(const GaussianPair& model);

/// Cumulant generating function of log(f0/f1) under f1:
/// Lambda(theta) = (gap^2 / (2 sigma2)) * theta * (theta - 1).
double cumulant_lambda(const GaussianPair& model, double theta) noexcept;

/// KL divergence between N(x, sigma2) and N(y, sigma2): (x - y)^2 / (2 sigma2).
double kl_gauss(double x, double y, double sigma2);

enum class NoiseKind { gaussian, custom_sub_gaussian };

/// Zero-mean additive noise eta_n. `sigma2` is the declared sub-Gaussian
/// variance proxy; the generator may vary with the step index, so noise need
/// not be identically distributed.
class NoiseSource {
 public:
  using Generator = std::function<double(std::int64_t step, RandomStream& rng)>;

  /// N(0, sigma2). sigma2 == 0 gives deterministic (zero) noise.
  static NoiseSource gaussian(double sigma2);
  /// Uniform on [-half_width, half_width]; bounded, hence half_width^2-sub-Gaussian.
  static NoiseSource uniform(double half_width);
  /// Caller-supplied zero-mean generator with its sub-Gaussian parameter.
  static NoiseSource custom(double sigma2, Generator generator);

  NoiseKind kind() const noexcept { return kind_; }
  double sigma2() const noexcept { return sigma2_; }

  double sample(std::int64_t step, RandomStream& rng) const {
    if (kind_ == NoiseKind::gaussian) return sigma_ == 0.0 ? 0.0 : sigma_ * rng.normal();
    return generator_(step, rng);
  }

 private:
  NoiseSource(NoiseKind kind, double sigma2, Generator generator);

  NoiseKind kind_;
  double sigma2_;
  double sigma_;
  Generator generator_;
};

/// One realisation of the observation process over [1, horizon].
class Trajectory {
 public:
  Trajectory(std::vector<double> observations, std::optional<std::int64_t> change_point,
             std::uint64_t seed);

  std::span<const double> observations() const noexcept { return observations_; }
  std::optional<std::int64_t> change_point() const noexcept { return change_point_; }
  std::int64_t horizon() const noexcept { return static_cast<std::int64_t>(observations_.size()); }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::vector<double> observations_;
  std::optional<std::int64_t> change_point_;
  std::uint64_t seed_;
};

/// Draws X_n = mu0 + eta_n for n < change_point and mu1 + eta_n afterwards.
/// change_point must be in [1, horizon] or absent; the result depends only on
/// the arguments.
Trajectory sample_trajectory(const GaussianPair& model, std::int64_t horizon,
                             std::optional<std::int64_t> change_point, const NoiseSource& noise,
                             std::uint64_t seed);

}  // namespace qcd
