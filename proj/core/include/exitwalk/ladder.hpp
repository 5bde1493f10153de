#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exitwalk/increment_law.hpp"

namespace exitwalk {

/// First strict entry distributions, computed from a killed-walk linear
/// system. Index m holds the mass at m (entry 0 unused); `defect` is the
/// mass missing from [1, horizon], i.e. paths that dive past the kill depth
/// plus overshoot beyond the horizon.
struct FirstPassageResult {
  std::vector<double> pmf;
  double defect = 0.0;
  /// Depth extrapolation of `pmf` (per-entry Aitken over the doubling
  /// schedule, clamped into [pmf[m], pmf[m] + defect]). Equals `pmf` when a
  /// fixed depth was requested or the schedule was too short to fit.
  std::vector<double> extrapolated;
  double extrapolated_defect = 0.0;
  long long depth = 0;
  long long horizon = 0;
};

struct FirstPassageOptions {
  long long depth = 0;        ///< fixed kill depth when > 0 (no adaptation)
  long long depth0 = 256;     ///< starting depth for the doubling schedule
  long long max_depth = 1 << 17;
  double tol = 1e-10;         ///< stop once per-entry growth falls below tol/10
  double solve_tol = 1e-12;
};

/// Law of Z, the position at the first entry into [1, inf).
FirstPassageResult first_passage_up(const IncrementLaw& law, long long horizon,
                                    const FirstPassageOptions& opt = {});

/// Law of -Zhat, where Zhat is the position at the first entry into
/// (-inf, -1]. pmf[m] = P[Zhat = -m].
FirstPassageResult first_passage_down(const IncrementLaw& law, long long horizon,
                                      const FirstPassageOptions& opt = {});

struct V0Options {
  long long depth0 = 512;
  long long max_depth = 1 << 17;
  double target = 1e-8;       ///< stop doubling once the defect drops below this
  double solve_tol = 1e-12;
};

/// v0 = V_d(0), the mass the weak descending renewal function assigns to the
/// origin. `lower`/`upper` is a certified bracket from the kill-depth defect;
/// `value` is the extrapolated point estimate clamped into the bracket.
struct V0Result {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double defect = 0.0;        ///< entrance-mass defect at the final depth
  long long depth = 0;
  std::string route;
};

/// Entrance route: 1/v0 equals the probability that the walk re-enters the
/// closed half line strictly, P[S_{sigma[0,inf)} > 0] for walks that cannot
/// drift to -inf, and the mirrored quantity for downward-drifting walks.
V0Result v0_entrance(const IncrementLaw& law, const V0Options& opt = {});

struct V0SeriesResult {
  double value = 0.0;         ///< accelerated estimate
  double raw_value = 0.0;     ///< bare truncation at kmax
  double last_term = 0.0;     ///< final summand in the exponent (indicator)
  double tail_estimate = 0.0; ///< closure added to the exponent
  long long period = 1;
  long long terms = 0;
};

/// Series route: v0 = exp( sum_{k>=1} P[S_k = 0] / k ). The return probability
/// is tracked through a windowed self-convolution; the exponent tail is closed
/// with a fitted local-limit power law, so slowly decaying summands do not
/// poison the estimate.
V0SeriesResult v0_series(const IncrementLaw& law, long long kmax = 10000,
                         long long window = 0);

struct LadderOptions {
  long long horizon = 4096;
  double tol = 1e-10;         ///< total-variation stopping threshold
  int max_iterations = 400;
  double v0_override = 0.0;   ///< use this v0 instead of the entrance route
  V0Options v0;
};

/// Both strict ladder height laws on [1, horizon] plus the renewal mass v0.
struct LadderLaw {
  std::vector<double> z_pmf;    ///< z_pmf[m] = P[Z = m]
  std::vector<double> zhat_pmf; ///< zhat_pmf[m] = P[Zhat = -m]
  double v0 = 1.0;
  double z_defect = 0.0;
  double zhat_defect = 0.0;
  long long horizon = 0;
  int iterations = 0;
  double final_tv = 0.0;
  std::uint64_t law_hash = 0;
};

/// Factorization route. Alternates the two exact identities
///   P[Z = x]     = sum_{y>=0} v_d(y) p(x + y)
///   P[Zhat = -x] = v0 * sum_{y>=0} u_a(y) p(-x - y)
/// rebuilding each renewal sequence from the opposite ladder law, starting
/// from v_d = v0 * delta_0, until the Z law stops moving in total variation.
/// Truncation is spatial only; no walk paths are discarded.
LadderLaw wiener_hopf_ladder(const IncrementLaw& law,
                             const LadderOptions& opt = {});

} // namespace exitwalk
