#include "exitwalk/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "exitwalk/errors.hpp"

namespace exitwalk {

namespace {

constexpr std::uint64_t kPathStepCap = 100000000ull; // per-path circuit breaker

void check_run(long long n, int shards) {
  if (n < 1) throw ConfigError("monte carlo run needs n >= 1");
  if (shards < 1) throw ConfigError("shard count must be >= 1");
}

// sample standard deviation of an indicator / sqrt(n)
double indicator_se(double phat, long long n) {
  if (n < 2) return 0.0;
  return std::sqrt(std::max(0.0, phat * (1.0 - phat)) /
                   static_cast<double>(n - 1));
}

struct Span {
  long long begin = 0;
  long long end = 0;
};

// contiguous split; shard s of k gets [s*ceil(n/k), ...)
Span shard_span(long long n, int shards, int s) {
  const long long per = (n + shards - 1) / shards;
  const long long b = std::min(n, per * static_cast<long long>(s));
  return {b, std::min(n, b + per)};
}

[[noreturn]] void breaker_trip(const char* what) {
  throw ResourceError(std::string(what) +
                      " passed 1e8 steps without crossing; the law may not "
                      "oscillate (check drift and tail balance)");
}

} // namespace

IncrementSampler::IncrementSampler(const IncrementLaw& law)
    : law_(law), lo_(law.window_lo()) {
  const long long lo = law.window_lo(), hi = law.window_hi();
  if (hi - lo + 1 > (1ll << 26))
    throw ResourceError("increment window too wide for an alias table");
  const auto n = static_cast<std::size_t>(hi - lo + 1);
  if (!law.is_bounded()) {
    p_above_ = law.tail_above(hi);
    p_below_ = law.tail_below(-lo);
  }

  std::vector<double> q(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    q[k] = law.pmf(lo + static_cast<long long>(k));
    total += q[k];
  }
  for (std::size_t k = 0; k < n; ++k)
    q[k] *= static_cast<double>(n) / total;

  // Vose's alias construction. Stacks are filled in ascending index order and
  // drained from the back, so the table is identical on every build.
  accept_.assign(n, 1.0);
  alias_.resize(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t k = 0; k < n; ++k) {
    alias_[k] = static_cast<std::uint32_t>(k);
    (q[k] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(k));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    accept_[s] = q[s];
    alias_[s] = l;
    q[l] = (q[l] + q[s]) - 1.0;
    if (q[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // leftovers on either stack are within rounding of 1; accept_ stays 1
}

long long IncrementSampler::sample(const RngStream& stream,
                                   std::uint64_t i) const {
  const auto u = stream.uniforms_at(i);
  if (u[0] < p_above_) {
    // u[0] uniform on [0, p_above) makes v uniform on (0, p_above], and the
    // smallest k with tail(k) <= v lands on k with mass tail(k-1) - tail(k)
    const double v = std::min(p_above_ - u[0], p_above_);
    return law_.quantile_above(v);
  }
  const double edge = p_above_ + p_below_;
  if (u[0] < edge) {
    const double v = std::min(edge - u[0], p_below_);
    return -law_.quantile_below(v);
  }
  const double pos = u[1] * static_cast<double>(accept_.size());
  auto idx = static_cast<std::size_t>(pos);
  if (idx >= accept_.size()) idx = accept_.size() - 1;
  const double frac = pos - static_cast<double>(idx);
  return lo_ + static_cast<long long>(frac < accept_[idx] ? idx : alias_[idx]);
}

long long sample_increment(const IncrementLaw& law, const RngStream& stream,
                           std::uint64_t i) {
  return IncrementSampler(law).sample(stream, i);
}

McEstimate estimate_exit(const IncrementLaw& law, long long x, long long R,
                         long long n, std::uint64_t seed, int shards) {
  if (R < 0) throw ConfigError("exit needs R >= 0");
  if (x < 0 || x > R) throw ConfigError("exit start must lie in [0, R]");
  check_run(n, shards);
  const IncrementSampler smp(law);
  long long succ = 0;
  for (int s = 0; s < shards; ++s) {
    const Span sp = shard_span(n, shards, s);
    const RngStream stream(seed, static_cast<std::uint64_t>(s));
    std::uint64_t draw = 0;
    for (long long p = sp.begin; p < sp.end; ++p) {
      long long pos = x;
      for (std::uint64_t t = 0;; ++t) {
        if (t >= kPathStepCap) breaker_trip("exit path");
        pos += smp.sample(stream, draw++);
        if (pos > R) {
          ++succ;
          break;
        }
        if (pos < 0) break;
      }
    }
  }
  McEstimate e;
  e.estimate = static_cast<double>(succ) / static_cast<double>(n);
  e.se = indicator_se(e.estimate, n);
  e.n = n;
  e.seed = seed;
  e.shards = shards;
  return e;
}

LadderSample estimate_ladder(const IncrementLaw& law, long long n,
                             std::uint64_t seed, int shards, long long cap) {
  if (cap < 1) throw ConfigError("ladder cap must be >= 1");
  check_run(n, shards);
  const IncrementSampler smp(law);
  std::vector<long long> up(static_cast<std::size_t>(cap) + 1, 0);
  std::vector<long long> down(static_cast<std::size_t>(cap) + 1, 0);
  LadderSample out;
  for (int s = 0; s < shards; ++s) {
    const Span sp = shard_span(n, shards, s);
    const RngStream stream(seed, static_cast<std::uint64_t>(s));
    std::uint64_t draw = 0;
    for (long long p = sp.begin; p < sp.end; ++p) {
      long long pos = 0;
      for (std::uint64_t t = 0; pos < 1; ++t) {
        if (t >= kPathStepCap) breaker_trip("ascending ladder draw");
        pos += smp.sample(stream, draw++);
      }
      if (pos <= cap)
        ++up[static_cast<std::size_t>(pos)];
      else
        ++out.z_overflow;
      pos = 0;
      for (std::uint64_t t = 0; pos > -1; ++t) {
        if (t >= kPathStepCap) breaker_trip("descending ladder draw");
        pos += smp.sample(stream, draw++);
      }
      if (-pos <= cap)
        ++down[static_cast<std::size_t>(-pos)];
      else
        ++out.zhat_overflow;
    }
  }
  const auto bins = static_cast<std::size_t>(cap) + 1;
  out.z_pmf.assign(bins, 0.0);
  out.z_se.assign(bins, 0.0);
  out.zhat_pmf.assign(bins, 0.0);
  out.zhat_se.assign(bins, 0.0);
  for (std::size_t m = 1; m < bins; ++m) {
    out.z_pmf[m] = static_cast<double>(up[m]) / static_cast<double>(n);
    out.z_se[m] = indicator_se(out.z_pmf[m], n);
    out.zhat_pmf[m] = static_cast<double>(down[m]) / static_cast<double>(n);
    out.zhat_se[m] = indicator_se(out.zhat_pmf[m], n);
  }
  out.n = n;
  out.seed = seed;
  out.shards = shards;
  return out;
}

RhoScan estimate_rho(const IncrementLaw& law, long long n_paths,
                     long long n_steps, std::uint64_t seed, int shards) {
  if (n_steps < 2)
    throw ConfigError("rho scan needs n_steps >= 2 so the half-time "
                      "checkpoint is meaningful");
  check_run(n_paths, shards);
  const IncrementSampler smp(law);
  const long long half = n_steps / 2;
  long long pos_half = 0, pos_full = 0;
  for (int s = 0; s < shards; ++s) {
    const Span sp = shard_span(n_paths, shards, s);
    const RngStream stream(seed, static_cast<std::uint64_t>(s));
    std::uint64_t draw = 0;
    for (long long p = sp.begin; p < sp.end; ++p) {
      long long pos = 0;
      for (long long t = 1; t <= n_steps; ++t) {
        pos += smp.sample(stream, draw++);
        if (t == half && pos > 0) ++pos_half;
      }
      if (pos > 0) ++pos_full;
    }
  }
  RhoScan scan;
  scan.n_steps = n_steps;
  scan.at_half.estimate =
      static_cast<double>(pos_half) / static_cast<double>(n_paths);
  scan.at_half.se = indicator_se(scan.at_half.estimate, n_paths);
  scan.at_half.n = n_paths;
  scan.at_half.seed = seed;
  scan.at_half.shards = shards;
  scan.at_full = scan.at_half;
  scan.at_full.estimate =
      static_cast<double>(pos_full) / static_cast<double>(n_paths);
  scan.at_full.se = indicator_se(scan.at_full.estimate, n_paths);
  return scan;
}

ConditionalOvershoot conditional_overshoot(const IncrementLaw& law,
                                           long long x, long long R,
                                           double eps, long long n,
                                           std::uint64_t seed, int shards) {
  if (R < 0) throw ConfigError("exit needs R >= 0");
  if (x < 0 || x > R) throw ConfigError("exit start must lie in [0, R]");
  if (!(eps >= 0.0)) throw ConfigError("overshoot fraction must be >= 0");
  check_run(n, shards);
  const IncrementSampler smp(law);
  const double bar = eps * static_cast<double>(R);
  long long succ = 0, over = 0;
  for (int s = 0; s < shards; ++s) {
    const Span sp = shard_span(n, shards, s);
    const RngStream stream(seed, static_cast<std::uint64_t>(s));
    std::uint64_t draw = 0;
    for (long long p = sp.begin; p < sp.end; ++p) {
      long long pos = x;
      for (std::uint64_t t = 0;; ++t) {
        if (t >= kPathStepCap) breaker_trip("exit path");
        pos += smp.sample(stream, draw++);
        if (pos > R) {
          ++succ;
          if (static_cast<double>(pos - R) > bar) ++over;
          break;
        }
        if (pos < 0) break;
      }
    }
  }
  if (succ < 100)
    throw ConvergenceError(
        "conditional overshoot needs at least 100 right-side exits, got " +
            std::to_string(succ) + " of " + std::to_string(n) + " paths",
        static_cast<double>(succ));
  ConditionalOvershoot out;
  out.paths = n;
  out.successes = succ;
  out.estimate.estimate =
      static_cast<double>(over) / static_cast<double>(succ);
  out.estimate.se = indicator_se(out.estimate.estimate, succ);
  out.estimate.n = succ;
  out.estimate.seed = seed;
  out.estimate.shards = shards;
  return out;
}

} // namespace exitwalk
