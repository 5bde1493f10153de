#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exitwalk/increment_law.hpp"
#include "exitwalk/renewal.hpp"

namespace exitwalk {

struct ExitOptions {
  double tol = 1e-11;        ///< residual target for the interior solve
  bool want_green = false;   ///< build the full fundamental matrix
  std::size_t memory_limit_mb = 3000;
};

/// Two-sided exit from [0, R]: success means leaving through the right side
/// before touching (-inf, -1]. Solved through the interior-killed kernel with
/// analytic boundary columns, so the only numerical error is the linear
/// solver residual.
struct ExitSolution {
  long long R = 0;
  std::vector<double> h;           ///< h[x] = P_x(exit right first), x in [0,R]
  std::vector<double> h_fail;      ///< mirrored failure-side solve (not 1-h)
  std::vector<double> success_col; ///< r[x] = P[X > R-x]
  std::vector<double> failure_col; ///< f[x] = P[X < -x]
  /// fundamental matrix (row-major, (R+1)^2): expected visits to y from x
  /// before leaving [0, R]; filled only when ExitOptions::want_green is set
  std::vector<double> green2;
  std::uint64_t law_hash = 0;
  std::string method;
  double residual = 0.0;
};

ExitSolution solve_exit(const IncrementLaw& law, long long R,
                        const ExitOptions& opt = {});

/// One row of the fundamental matrix: expected visits to each y in [0, R]
/// started from x, before the walk leaves [0, R].
std::vector<double> exit_green_row(const IncrementLaw& law, long long R,
                                   long long x, const ExitOptions& opt = {});

/// Joint law of the overshoot over R on the success event:
/// pmf[m] = P_x[S_exit = R + m, exit right first], m in [1, m_max].
struct OvershootLaw {
  std::vector<double> pmf; ///< index m, entry 0 unused
  double tail = 0.0;       ///< success mass overshooting past m_max (analytic)
  double total = 0.0;      ///< pmf sum + tail; equals h(x) up to the residual
  long long R = 0;
  long long x = 0;
};

OvershootLaw overshoot_law(const IncrementLaw& law, long long R, long long x,
                           long long m_max, const ExitOptions& opt = {});

/// Optional-stopping check: E_x[V_d(S_exit); exit right] should equal V_d(x)
/// exactly. The sum runs to the table horizon; the mass beyond it is closed
/// with the table's final value (plus a slope term when the mean overshoot
/// excess is finite) and reported, never dropped.
struct MartingaleCheck {
  double value = 0.0;     ///< truncated sum + remainder
  double raw_sum = 0.0;   ///< truncated sum alone
  double remainder = 0.0; ///< closure added for mass beyond the horizon
  double target = 0.0;    ///< V_d(x)
  double rel_error = 0.0; ///< |value - target| / target
};

MartingaleCheck martingale_functional(const IncrementLaw& law, long long R,
                                      long long x, const RenewalTable& table,
                                      const ExitOptions& opt = {});

/// P_x[the walk visits R itself before entering (-inf,-1]], through the
/// half-line green function: g(x,R)/g(R,R).
double hitting_before_ruin(const RenewalTable& table, long long x, long long R);

/// Diagnostic ratio x -> h(x) V_d(R) / V_d(x); the renewal bound keeps every
/// entry at or below one.
std::vector<double> ratio_profile(const ExitSolution& sol,
                                  const RenewalTable& table);

} // namespace exitwalk
