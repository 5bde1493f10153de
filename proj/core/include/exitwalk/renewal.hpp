#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exitwalk/ladder.hpp"

namespace exitwalk {

/// Renewal sequence of a (possibly defective) lattice law f supported on
/// [1, n]: u(0) = 1, u(n) = sum_{k=1..n} f[k] u(n-k). `f` is indexed so that
/// f[k] is the mass at k (f[0] is ignored); entries past the end count as 0.
/// u(0..n) depends only on f(1..n), so a horizon-truncated ladder law yields
/// the exact renewal values inside the horizon. Direct summation for short
/// sequences, power-series reciprocal above that; the two agree to 1e-12.
std::vector<double> renewal_sequence(const std::vector<double>& f, long long n);

/// Renewal material derived from the two ladder laws, tabulated on
/// [0, horizon]:
///   u_a  strict ascending renewal sequence (from Z)
///   v_d  weak descending renewal mass, v0 * (strict descending sequence)
///   U_a(x) = sum_{y<=x} u_a(y),  V_d(x) = sum_{y<=x} v_d(y)
/// Ladder defects are carried through untouched: a defective input produces
/// renewal sequences of the defective law, not of a renormalized one.
struct RenewalTable {
  std::vector<double> u_a;
  std::vector<double> v_d;
  std::vector<double> U_a;
  std::vector<double> V_d;
  double v0 = 1.0;
  long long horizon = 0;
  double z_defect = 0.0;    ///< quality annotations forwarded from the ladder
  double zhat_defect = 0.0;
  std::uint64_t law_hash = 0;
};

RenewalTable build_tables(const LadderLaw& ladder, long long horizon);

/// Green function of the walk killed on leaving [0, inf):
///   g(x, y) = sum_{k=0}^{min(x,y)} v_d(x - k) u_a(y - k)
/// Expected visits to y before the first entry into (-inf, -1], started at x.
double spitzer_green(const RenewalTable& t, long long x, long long y);

/// sum_{y=0}^{r} g(x, y), evaluated through the closed form
/// sum_{k=0}^{x} v_d(k) U_a(r - x + k); requires r >= x.
double green_row_sum(const RenewalTable& t, long long x, long long r);

} // namespace exitwalk
