#include "qcd/models.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "qcd/errors.hpp"

namespace qcd {

GaussianPair::GaussianPair(double mu0, double mu1, double sigma2)
    : mu0_(mu0), mu1_(mu1), sigma2_(sigma2) {
  if (!std::isfinite(mu0) || !std::isfinite(mu1)) {
    throw InvalidParameter("GaussianPair: means must be finite");
  }
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw InvalidParameter("GaussianPair: sigma2 must be finite and > 0, got " +
                           std::to_string(sigma2));
  }
}

double GaussianPair::change_gap() const noexcept { return std::abs(mu0_ - mu1_); }

double info_const_k(const GaussianPair& model) {
  const double gap = model.change_gap();
  if (gap == 0.0) throw DegenerateModel("info_const_k: mu0 == mu1, K is undefined");
  return gap * gap / model.sigma2();
}

double cumulant_lambda(const GaussianPair& model, double theta) noexcept {
  const double gap = model.change_gap();
  return gap * gap / (2.0 * model.sigma2()) * theta * (theta - 1.0);
}

double kl_gauss(double x, double y, double sigma2) {
  if (!(sigma2 > 0.0)) throw InvalidParameter("kl_gauss: sigma2 must be > 0");
  const double d = x - y;
  return d * d / (2.0 * sigma2);
}

NoiseSource::NoiseSource(NoiseKind kind, double sigma2, Generator generator)
    : kind_(kind), sigma2_(sigma2), sigma_(std::sqrt(sigma2)), generator_(std::move(generator)) {}

NoiseSource NoiseSource::gaussian(double sigma2) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw InvalidParameter("NoiseSource::gaussian: sigma2 must be finite and >= 0");
  }
  return NoiseSource(NoiseKind::gaussian, sigma2, {});
}

NoiseSource NoiseSource::uniform(double half_width) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw InvalidParameter("NoiseSource::uniform: half_width must be finite and > 0");
  }
  return NoiseSource(NoiseKind::custom_sub_gaussian, half_width * half_width,
                     [half_width](std::int64_t, RandomStream& rng) {
                       return half_width * (2.0 * rng.uniform() - 1.0);
                     });
}

NoiseSource NoiseSource::custom(double sigma2, Generator generator) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw InvalidParameter("NoiseSource::custom: sigma2 must be finite and >= 0");
  }
  if (!generator) throw InvalidParameter("NoiseSource::custom: empty generator");
  return NoiseSource(NoiseKind::custom_sub_gaussian, sigma2, std::move(generator));
}

Trajectory::Trajectory(std::vector<double> observations, std::optional<std::int64_t> change_point,
                       std::uint64_t seed)
    : observations_(std::move(observations)), change_point_(change_point), seed_(seed) {
  if (observations_.empty()) throw InvalidParameter("Trajectory: horizon must be >= 1");
  if (change_point_ && (*change_point_ < 1 || *change_point_ > horizon())) {
    throw InvalidParameter("Trajectory: change point outside [1, horizon]");
  }
}

Trajectory sample_trajectory(const GaussianPair& model, std::int64_t horizon,
                             std::optional<std::int64_t> change_point, const NoiseSource& noise,
                             std::uint64_t seed) {
  if (horizon < 1) throw InvalidParameter("sample_trajectory: horizon must be >= 1");
  if (change_point && (*change_point < 1 || *change_point > horizon)) {
    throw InvalidParameter("sample_trajectory: change point " + std::to_string(*change_point) +
                           " outside [1, " + std::to_string(horizon) + "]");
  }
  RandomStream rng(StreamKey{seed, 0, change_point, StreamRole::trajectory});
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(horizon));
  for (std::int64_t n = 1; n <= horizon; ++n) {
    xs.push_back(model.mean_at(n, change_point) + noise.sample(n, rng));
  }
  return Trajectory(std::move(xs), change_point, seed);
}

}  // namespace qcd
