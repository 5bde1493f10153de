#pragma once

#include <cstdint>
#include <vector>

#include "exitwalk/increment_law.hpp"
#include "exitwalk/philox.hpp"

namespace exitwalk {

/// One Monte Carlo number. Estimates are pure functions of
/// (seed, shard count, sample count): shard i draws from the counter stream
/// (seed, i), tallies are integers, and shards are reduced in index order, so
/// a rerun with the same triple is bit-identical no matter how the shards
/// were scheduled.
struct McEstimate {
  double estimate = 0.0;
  double se = 0.0;       ///< sample standard deviation / sqrt(n)
  long long n = 0;       ///< samples entering the estimate
  std::uint64_t seed = 0;
  int shards = 1;
};

/// Exact increment sampler. Interior points come from an alias table over the
/// storage window; mass beyond the window is drawn by inverting the analytic
/// tail, landing on k with probability tail(k-1) - tail(k). One Philox block
/// per draw.
class IncrementSampler {
public:
  explicit IncrementSampler(const IncrementLaw& law);

  /// Draw #i of `stream`; a pure function of (law, stream, i).
  long long sample(const RngStream& stream, std::uint64_t i) const;

  const IncrementLaw& law() const { return law_; }
  double window_probability() const { return 1.0 - p_above_ - p_below_; }

private:
  IncrementLaw law_;
  std::vector<double> accept_;      ///< alias acceptance thresholds
  std::vector<std::uint32_t> alias_;
  long long lo_ = 0;
  double p_above_ = 0.0;            ///< analytic mass past the window, right
  double p_below_ = 0.0;
};

/// One draw without keeping a sampler around; builds the alias table each
/// call, so loops should use IncrementSampler directly.
long long sample_increment(const IncrementLaw& law, const RngStream& stream,
                           std::uint64_t i);

/// P_x[the walk leaves [0, R] through the right side], by simulating paths
/// until they exit. Each path aborts with a resource error after 1e8 steps;
/// an oscillating walk essentially never gets there.
McEstimate estimate_exit(const IncrementLaw& law, long long x, long long R,
                         long long n, std::uint64_t seed, int shards = 1);

/// Empirical strict ladder height laws from n independent first-passage
/// draws per side. pmf[m] estimates P[Z = m] (and P[-Zhat = m]); index 0 is
/// unused; draws past `cap` are counted in `overflow`, never dropped.
struct LadderSample {
  std::vector<double> z_pmf, z_se;
  std::vector<double> zhat_pmf, zhat_se;
  long long z_overflow = 0;
  long long zhat_overflow = 0;
  long long n = 0;       ///< draws per side
  std::uint64_t seed = 0;
  int shards = 1;
};

LadderSample estimate_ladder(const IncrementLaw& law, long long n,
                             std::uint64_t seed, int shards = 1,
                             long long cap = 1 << 16);

/// Sign of the walk at two checkpoints of the same paths: P[S_k > 0] read at
/// k = n_steps/2 and k = n_steps. A still-drifting estimate shows up as a gap
/// between the two; the caller decides whether n_steps was enough.
struct RhoScan {
  McEstimate at_half;
  McEstimate at_full;
  long long n_steps = 0;
};

RhoScan estimate_rho(const IncrementLaw& law, long long n_paths,
                     long long n_steps, std::uint64_t seed, int shards = 1);

/// Conditional overshoot tail P_x[S_exit - R > eps*R | exit right first].
/// Conditions on the successful paths, so the McEstimate's n is the success
/// count; paths/successes are reported raw for downstream interval work.
struct ConditionalOvershoot {
  McEstimate estimate;
  long long paths = 0;
  long long successes = 0;
};

ConditionalOvershoot conditional_overshoot(const IncrementLaw& law,
                                           long long x, long long R,
                                           double eps, long long n,
                                           std::uint64_t seed, int shards = 1);

} // namespace exitwalk
