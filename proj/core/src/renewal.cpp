#include "exitwalk/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "exitwalk/convolution.hpp"
#include "exitwalk/errors.hpp"

namespace exitwalk {

std::vector<double> renewal_sequence(const std::vector<double>& f,
                                     long long n) {
  if (n < 0) throw ConfigError("renewal sequence length must be >= 0");
  const std::size_t un = static_cast<std::size_t>(n);

  std::vector<std::pair<long long, double>> nz;
  for (std::size_t k = 1; k < f.size() && k <= un; ++k)
    if (f[k] != 0.0) nz.emplace_back(static_cast<long long>(k), f[k]);

  // direct recursion while cheap, power-series reciprocal otherwise
  if (static_cast<double>(un) * static_cast<double>(std::max<std::size_t>(
          nz.size(), 1)) <= 6.7e7) {
    std::vector<double> u(un + 1, 0.0);
    u[0] = 1.0;
    for (std::size_t m = 1; m <= un; ++m) {
      double s = 0.0;
      for (const auto& [k, fk] : nz) {
        if (static_cast<std::size_t>(k) > m) break;
        s += fk * u[m - static_cast<std::size_t>(k)];
      }
      u[m] = s;
    }
    return u;
  }

  std::vector<double> a(un + 1, 0.0);
  a[0] = 1.0;
  for (const auto& [k, fk] : nz) a[static_cast<std::size_t>(k)] = -fk;
  std::vector<double> u = ps_inverse(a, un + 1);
  for (double& x : u) x = std::max(0.0, x);
  return u;
}

RenewalTable build_tables(const LadderLaw& ladder, long long horizon) {
  if (horizon < 0) throw ConfigError("renewal table horizon must be >= 0");
  if (horizon > ladder.horizon)
    throw ConfigError(
        "renewal table horizon exceeds the ladder horizon; recompute the "
        "ladder with a wider window first");

  RenewalTable t;
  t.horizon = horizon;
  t.v0 = ladder.v0;
  t.z_defect = ladder.z_defect;
  t.zhat_defect = ladder.zhat_defect;
  t.law_hash = ladder.law_hash;

  t.u_a = renewal_sequence(ladder.z_pmf, horizon);
  std::vector<double> u_d = renewal_sequence(ladder.zhat_pmf, horizon);
  t.v_d.resize(u_d.size());
  for (std::size_t i = 0; i < u_d.size(); ++i) t.v_d[i] = ladder.v0 * u_d[i];

  t.U_a.resize(t.u_a.size());
  t.V_d.resize(t.v_d.size());
  long double sa = 0.0L, sd = 0.0L;
  for (std::size_t i = 0; i < t.u_a.size(); ++i) {
    sa += t.u_a[i];
    sd += t.v_d[i];
    t.U_a[i] = static_cast<double>(sa);
    t.V_d[i] = static_cast<double>(sd);
  }
  return t;
}

double spitzer_green(const RenewalTable& t, long long x, long long y) {
  if (x < 0 || y < 0 || x > t.horizon || y > t.horizon)
    throw ConfigError("green function arguments are outside the table");
  const long long kmax = std::min(x, y);
  long double s = 0.0L;
  for (long long k = 0; k <= kmax; ++k)
    s += static_cast<long double>(t.v_d[static_cast<std::size_t>(x - k)]) *
         t.u_a[static_cast<std::size_t>(y - k)];
  return static_cast<double>(s);
}

double green_row_sum(const RenewalTable& t, long long x, long long r) {
  if (x < 0 || r < x || r > t.horizon)
    throw ConfigError("green row sum needs 0 <= x <= r <= horizon");
  long double s = 0.0L;
  for (long long k = 0; k <= x; ++k)
    s += static_cast<long double>(t.v_d[static_cast<std::size_t>(k)]) *
         t.U_a[static_cast<std::size_t>(r - x + k)];
  return static_cast<double>(s);
}

} // namespace exitwalk
