#include "qcd/split_scan.hpp"

#include <algorithm>
#include <cmath>

#include "qcd/errors.hpp"

namespace qcd {
namespace {

// Relative and absolute slack on certified bounds; covers rounding in both the
// bound and the exact term by many orders of magnitude.
constexpr double kRelSlack = 1e-9;
constexpr double kAbsSlack = 1e-12;

}  // namespace

SplitScan::SplitScan(double sigma2) : sigma2_(sigma2), shifted_{0.0} {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw InvalidParameter("SplitScan: sigma2 must be finite and > 0");
  }
}

void SplitScan::push(double x) {
  if (n_ == 0) shift_ = x;
  shifted_.push_back(shifted_.back() + (x - shift_));
  ++n_;
  for (int level = 0; level < kLevels; ++level) {
    const std::int64_t size = kBlockSizes[level];
    if (n_ % size != 0) break;  // sizes nest, so coarser levels cannot complete either
    const std::int64_t a = n_ - size;
    const double base = shifted_[static_cast<std::size_t>(a)];
    const double slope = (shifted_[static_cast<std::size_t>(n_)] - base) / static_cast<double>(size);
    double dev = 0.0;
    for (std::int64_t k = a + 1; k <= n_; ++k) {
      const double d = shifted_[static_cast<std::size_t>(k)] - base - static_cast<double>(k - a) * slope;
      dev = std::max(dev, std::abs(d));
    }
    blocks_[level].push_back({slope, dev});
  }
}

double SplitScan::shifted_term(std::int64_t k, double total, double n) const noexcept {
  if (k >= n_) return 0.0;
  const double kd = static_cast<double>(k);
  const double head = shifted_[static_cast<std::size_t>(k)];
  const double mean_all = total / n;
  const double mean_pre = head / kd;
  const double mean_post = (total - head) / (n - kd);
  const double dp = mean_pre - mean_all;
  const double dq = mean_post - mean_all;
  return (kd * dp * dp + (n - kd) * dq * dq) / (2.0 * sigma2_);
}

double SplitScan::term(std::int64_t k) const noexcept {
  return shifted_term(k, shifted_.back(), static_cast<double>(n_));
}

double SplitScan::max_term(std::int64_t k_lo) const noexcept {
  const double total = shifted_.back();
  const double n = static_cast<double>(n_);
  double best = 0.0;  // the k = n term
  for (std::int64_t k = std::max<std::int64_t>(k_lo, 1); k < n_; ++k) {
    best = std::max(best, shifted_term(k, total, n));
  }
  return best;
}

double SplitScan::block_bound(int level, std::int64_t block, double mean) const noexcept {
  // Block covers k in (a, a + size]. For each such k,
  //   |S_k - k mean| <= |S_a - a mean| + deviation + size |mean - slope|,
  // and n / (k (n - k)) is convex in k, so its maximum sits at an endpoint.
  const std::int64_t size = kBlockSizes[level];
  const auto& s = blocks_[level][static_cast<std::size_t>(block)];
  const std::int64_t a = block * size;
  const double ad = static_cast<double>(a);
  const double spread = std::abs(shifted_[static_cast<std::size_t>(a)] - ad * mean) + s.deviation +
                        static_cast<double>(size) * std::abs(mean - s.slope);
  const double n = static_cast<double>(n_);
  const double k1 = ad + 1.0;
  const double k2 = ad + static_cast<double>(size);
  const double weight = std::max(n / (k1 * (n - k1)), n / (k2 * (n - k2)));
  return spread * spread * weight / (2.0 * sigma2_);
}

bool SplitScan::any_term_reaches(std::int64_t k_lo, double level) const noexcept {
  if (level <= 0.0) return true;  // e_n = 0
  const double total = shifted_.back();
  const double n = static_cast<double>(n_);
  const double mean = total / n;
  std::int64_t k = std::max<std::int64_t>(k_lo, 1);
  const std::int64_t k_hi = n_ - 1;  // e_n = 0 < level
  // Last k of the block at each level whose bound already failed; such a block
  // is inspected at the next finer level instead.
  std::int64_t open_until[kLevels] = {};
  while (k <= k_hi) {
    bool skipped = false;
    for (int lv = kLevels - 1; lv >= 0; --lv) {
      const std::int64_t size = kBlockSizes[lv];
      const std::int64_t block = (k - 1) / size;
      const std::int64_t end = (block + 1) * size;
      // A block is usable once complete and clear of k = n (weight blows up there).
      // Bounding a whole block also covers a partial start at k_lo.
      if (end > k_hi || k <= open_until[lv]) continue;
      const double bound = block_bound(lv, block, mean);
      if (bound * (1.0 + kRelSlack) + kAbsSlack < level) {
        k = end + 1;
        skipped = true;
        break;
      }
      open_until[lv] = end;
    }
    if (skipped) continue;
    if (shifted_term(k, total, n) >= level) return true;
    ++k;
  }
  return false;
}

double SplitScan::log_sum_exp_terms() const {
  const double total = shifted_.back();
  const double n = static_cast<double>(n_);
  scratch_.resize(static_cast<std::size_t>(n_));
  double peak = 0.0;
  for (std::int64_t k = 1; k <= n_; ++k) {
    const double e = shifted_term(k, total, n);
    scratch_[static_cast<std::size_t>(k - 1)] = e;
    peak = std::max(peak, e);
  }
  double sum = 0.0;
  for (const double e : scratch_) sum += std::exp(e - peak);
  return peak + std::log(sum);
}

}  // namespace qcd
