#pragma once

#include <cstdint>
#include <vector>

namespace qcd {

/// Prefix-sum store behind the GLR and GSR statistics.
///
/// For n observations and a split point k in [1, n] the split term is
///
///   e_k = k D(mean_{1:k}; mean_{1:n}) + (n - k) D(mean_{k+1:n}; mean_{1:n}),
///
/// with D(x; y) = (x - y)^2 / (2 sigma2) and the second summand zero at k = n.
/// Every mean comes from prefix sums, so one term costs O(1).
///
/// Observations are stored relative to the first one; all split terms are
/// invariant under a common shift and this keeps the sums well conditioned
/// when the means are far from zero.
///
/// Completed blocks of 8, 64, 512 and 4096 consecutive prefix sums carry a
/// summary (chord slope and maximum deviation from the chord). Using the identity
///   e_k = n (S_k - k mean_{1:n})^2 / (k (n - k) 2 sigma2)
/// a summary bounds every e_k in its block in O(1), which lets
/// `any_term_reaches` skip whole blocks that cannot reach the level and only
/// descend into the ones that might.
class SplitScan {
 public:
  static constexpr int kLevels = 4;
  static constexpr std::int64_t kBlockSizes[kLevels] = {8, 64, 512, 4096};

  explicit SplitScan(double sigma2);

  void push(double x);

  std::int64_t count() const noexcept { return n_; }
  double sigma2() const noexcept { return sigma2_; }
  /// Sum of the first j observations, j in [0, n].
  double prefix_sum(std::int64_t j) const noexcept {
    return shifted_[static_cast<std::size_t>(j)] + static_cast<double>(j) * shift_;
  }

  /// e_k for k in [1, n].
  double term(std::int64_t k) const noexcept;
  /// max_{k in [k_lo, n]} e_k (exact scan). Requires n >= 1 and 1 <= k_lo <= n.
  double max_term(std::int64_t k_lo) const noexcept;
  /// Exactly equivalent to max_term(k_lo) >= level, but skips blocks whose
  /// certified bound is below the level.
  bool any_term_reaches(std::int64_t k_lo, double level) const noexcept;
  /// log sum_{k=1}^{n} exp(e_k), max-shifted.
  double log_sum_exp_terms() const;

 private:
  struct BlockSummary {
    double slope;      // chord slope of the shifted prefix sums over the block
    double deviation;  // max |S_k - S_a - (k - a) slope| over the block
  };

  double shifted_term(std::int64_t k, double total, double n) const noexcept;
  double block_bound(int level, std::int64_t block, double mean) const noexcept;

  double sigma2_;
  double shift_ = 0.0;
  std::int64_t n_ = 0;
  std::vector<double> shifted_;  // shifted_[j] = sum_{i<=j} (x_i - shift_), shifted_[0] = 0
  std::vector<BlockSummary> blocks_[kLevels];
  mutable std::vector<double> scratch_;
};

}  // namespace qcd
