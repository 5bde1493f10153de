#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <doctest.h>

#include "exitwalk/errors.hpp"
#include "exitwalk/exit_solver.hpp"
#include "exitwalk/increment_law.hpp"
#include "exitwalk/ladder.hpp"
#include "exitwalk/law_spec.hpp"
#include "exitwalk/montecarlo.hpp"
#include "exitwalk/special_functions.hpp"

using namespace exitwalk;

namespace {

const IncrementLaw& law_of(const std::string& name) {
  static std::map<std::string, IncrementLaw> cache;
  auto it = cache.find(name);
  if (it == cache.end())
    it = cache.emplace(name, IncrementLaw::build(LawSpec::preset(name))).first;
  return it->second;
}

IncrementLaw bounded_law(std::map<long long, double> pmf, bool zero_mean) {
  LawSpec s;
  s.family = Family::bounded;
  s.pmf = std::move(pmf);
  s.zero_mean = zero_mean;
  return IncrementLaw::build(s);
}

// half the L1 distance between an empirical ladder pmf and a factorization
// pmf on [1, horizon], with everything past the horizon lumped into one bin;
// `agg` gets the matching half-sum of bin standard errors
double ladder_tv(const std::vector<double>& emp, const std::vector<double>& se,
                 long long emp_overflow, long long n,
                 const std::vector<double>& ref, long long horizon,
                 double* agg) {
  double tv = 0.0, acc = 0.0;
  double emp_tail = static_cast<double>(emp_overflow) / static_cast<double>(n);
  double ref_tail = 1.0;
  for (std::size_t m = horizon + 1; m < emp.size(); ++m) emp_tail += emp[m];
  for (long long m = 1; m <= horizon; ++m) {
    tv += std::fabs(emp[static_cast<std::size_t>(m)] -
                    ref[static_cast<std::size_t>(m)]);
    acc += se[static_cast<std::size_t>(m)];
    ref_tail -= ref[static_cast<std::size_t>(m)];
  }
  tv += std::fabs(emp_tail - ref_tail);
  acc += std::sqrt(emp_tail * (1.0 - emp_tail) / static_cast<double>(n - 1));
  *agg = 0.5 * acc;
  return 0.5 * tv;
}

} // namespace

TEST_SUITE_BEGIN("montecarlo");

TEST_CASE("sampler marginals match the law") {
  // unit walk: mean of 1e6 draws obeys the CLT bound 4/sqrt(n)
  {
    const IncrementSampler smp(law_of("srw"));
    const RngStream st(0x5eed0001ull, 0);
    double mean = 0.0;
    const long long n = 1000000;
    for (long long i = 0; i < n; ++i)
      mean += static_cast<double>(smp.sample(st, static_cast<std::uint64_t>(i)));
    mean /= static_cast<double>(n);
    CHECK(std::fabs(mean) < 0.004);
  }

  // symmetric pareto: empirical two-sided tail at 100 vs the analytic one
  {
    const auto& law = law_of("case2");
    const IncrementSampler smp(law);
    const RngStream st(0x5eed0002ull, 0);
    const long long n = 1000000;
    long long hits = 0;
    for (long long i = 0; i < n; ++i) {
      const long long v = smp.sample(st, static_cast<std::uint64_t>(i));
      if (v > 100 || v < -100) ++hits;
    }
    const double phat = static_cast<double>(hits) / static_cast<double>(n);
    const double want = law.tails(100.0).both;
    const double se =
        std::sqrt(phat * (1.0 - phat) / static_cast<double>(n - 1));
    CHECK(std::fabs(phat - want) < 3.0 * se);
  }

  // deep exterior, far past the window: the inverse-cdf branch on the
  // analytic tail has to reproduce P[X > t] = tail(t) out there too
  {
    const auto& law = law_of("c4");
    const IncrementSampler smp(law);
    const RngStream st(0x5eed0100ull, 0);
    const long long n = 1000000;
    long long h1 = 0, h2 = 0;
    for (long long i = 0; i < n; ++i) {
      const long long v = smp.sample(st, static_cast<std::uint64_t>(i));
      if (v > 10000) ++h1;
      if (v > 300000) ++h2;
    }
    for (const auto& [cnt, t] :
         {std::pair{h1, 10000ll}, std::pair{h2, 300000ll}}) {
      const double phat = static_cast<double>(cnt) / static_cast<double>(n);
      const double want = law.tail_above(t);
      const double se =
          std::sqrt(phat * (1.0 - phat) / static_cast<double>(n - 1));
      CHECK(std::fabs(phat - want) < 3.0 * se);
    }
  }

  // the one-shot form draws the same integers as a kept sampler
  {
    const auto& law = law_of("case2");
    const IncrementSampler smp(law);
    const RngStream st(0xabcdefull, 3);
    for (std::uint64_t i = 0; i < 50; ++i)
      CHECK(sample_increment(law, st, i) == smp.sample(st, i));
  }
}

TEST_CASE("interior goodness of fit") {
  // the p-value route first: chi-square upper tails pinned against an
  // independent reference implementation
  CHECK(inc_gamma_q(1.5, 7.81 / 2) ==
        doctest::Approx(5.010605635000589e-02).epsilon(1e-11));
  CHECK(inc_gamma_q(5.0, 3.94 / 2) ==
        doctest::Approx(9.500130907900908e-01).epsilon(1e-11));
  CHECK(inc_gamma_q(5.0, 25.188 / 2) ==
        doctest::Approx(5.000319252317846e-03).epsilon(1e-11));
  CHECK(inc_gamma_q(50.0, 124.342 / 2) ==
        doctest::Approx(5.000071576997178e-02).epsilon(1e-11));
  CHECK(inc_gamma_q(1.0, 13.8155 / 2) ==
        doctest::Approx(1.000005278996071e-03).epsilon(1e-11));

  const auto& law = law_of("case2");
  const IncrementSampler smp(law);
  const RngStream st(0x5eed0003ull, 0);
  const long long lo = law.window_lo(), hi = law.window_hi();
  const long long n = 1000000;
  std::vector<long long> cnt(static_cast<std::size_t>(hi - lo + 1), 0);
  for (long long i = 0; i < n; ++i) {
    const long long v = smp.sample(st, static_cast<std::uint64_t>(i));
    if (v >= lo && v <= hi) ++cnt[static_cast<std::size_t>(v - lo)];
  }

  // pool interior cells left to right until each bin expects >= 10 counts;
  // a short leftover at the right edge joins the final bin
  std::vector<double> expected;
  std::vector<long long> observed;
  double eacc = 0.0;
  long long oacc = 0;
  for (long long k = lo; k <= hi; ++k) {
    eacc += static_cast<double>(n) * law.pmf(k);
    oacc += cnt[static_cast<std::size_t>(k - lo)];
    if (eacc >= 10.0) {
      expected.push_back(eacc);
      observed.push_back(oacc);
      eacc = 0.0;
      oacc = 0;
    }
  }
  if (eacc > 0.0 && !expected.empty()) {
    expected.back() += eacc;
    observed.back() += oacc;
  }
  REQUIRE(expected.size() > 100);
  double stat = 0.0;
  for (std::size_t b = 0; b < expected.size(); ++b) {
    const double d = static_cast<double>(observed[b]) - expected[b];
    stat += d * d / expected[b];
  }
  const double dof = static_cast<double>(expected.size()) - 1.0;
  const double p = inc_gamma_q(0.5 * dof, 0.5 * stat);
  CHECK(p > 0.001);
}

TEST_CASE("exit estimator against closed form and solver") {
  // gambler's ruin: P_4(exit right of [0,9]) = 5/11
  {
    const auto e = estimate_exit(law_of("srw"), 4, 9, 100000, 0x5eed0004ull, 4);
    CHECK(e.n == 100000);
    CHECK(e.shards == 4);
    CHECK(std::fabs(e.estimate - 5.0 / 11.0) < 3.0 * e.se);
    CHECK(e.se == doctest::Approx(std::sqrt(e.estimate * (1.0 - e.estimate) /
                                            99999.0)));
  }

  // starting on the boundary: one up-move wins immediately
  {
    const auto e = estimate_exit(law_of("srw"), 9, 9, 20000, 0x5eed0005ull, 1);
    CHECK(e.estimate >= 0.5 - 3.0 * e.se);
  }

  // heavy one-sided family against the exact solver
  {
    const auto sol = solve_exit(law_of("c4"), 1000);
    const auto e = estimate_exit(law_of("c4"), 0, 1000, 100000, 0x5eed0006ull, 4);
    CHECK(std::fabs(e.estimate - sol.h[0]) < 3.0 * e.se);
  }
}

TEST_CASE("exit estimator across the case matrix") {
  const char* names[3] = {"srw", "case2", "c4"};
  const long long Rs[3] = {50, 100, 500};
  const long long xs[3][4] = {
      {1, 10, 25, 40}, {0, 25, 50, 75}, {0, 100, 250, 400}};
  for (int i = 0; i < 3; ++i) {
    const auto& law = law_of(names[i]);
    const auto sol = solve_exit(law, Rs[i]);
    for (int j = 0; j < 4; ++j) {
      const auto e =
          estimate_exit(law, xs[i][j], Rs[i], 20000,
                        0x5eed1000ull + static_cast<std::uint64_t>(i * 4 + j),
                        4);
      const double h = sol.h[static_cast<std::size_t>(xs[i][j])];
      CAPTURE(names[i]);
      CAPTURE(xs[i][j]);
      CHECK(std::fabs(e.estimate - h) < 3.0 * e.se);
    }
  }
}

TEST_CASE("ladder samples") {
  // unit walk: both ladder heights are deterministic
  {
    const auto ls = estimate_ladder(law_of("srw"), 400, 0xabc20ull, 2, 64);
    CHECK(ls.z_pmf[1] == 1.0);
    CHECK(ls.zhat_pmf[1] == 1.0);
    CHECK(ls.z_overflow == 0);
    CHECK(ls.z_se[1] == 0.0);
  }

  // skip-free upward: Z is 1 no matter the down jumps; -Zhat lives on {1,2}
  {
    const auto law =
        bounded_law({{-2, 1.0 / 3.0}, {1, 2.0 / 3.0}}, true);
    const auto ls = estimate_ladder(law, 400, 0xabc30ull, 2, 64);
    CHECK(ls.z_pmf[1] == 1.0);
    CHECK(ls.zhat_pmf[1] + ls.zhat_pmf[2] == doctest::Approx(1.0));
    CHECK(ls.zhat_pmf[1] > 0.3);
    CHECK(ls.zhat_pmf[2] > 0.3);
  }

  // symmetric pareto: total variation against the factorization pmfs stays
  // within the aggregate sampling error
  {
    const auto& law = law_of("case2");
    const auto ls = estimate_ladder(law, 2000, 0x5eed0201ull, 2, 1 << 16);
    const auto wh = wiener_hopf_ladder(law, {});
    double agg = 0.0;
    const double tv_z = ladder_tv(ls.z_pmf, ls.z_se, ls.z_overflow, ls.n,
                                  wh.z_pmf, wh.horizon, &agg);
    CHECK(tv_z <= 3.0 * agg);
    const double tv_zh = ladder_tv(ls.zhat_pmf, ls.zhat_se, ls.zhat_overflow,
                                   ls.n, wh.zhat_pmf, wh.horizon, &agg);
    CHECK(tv_zh <= 3.0 * agg);

    // per-bin standard errors follow the indicator formula
    const double p1 = ls.z_pmf[1];
    CHECK(ls.z_se[1] ==
          doctest::Approx(std::sqrt(p1 * (1.0 - p1) / 1999.0)));
  }
}

TEST_CASE("rho scans") {
  // symmetric law: both checkpoints sit on 1/2
  {
    const auto s = estimate_rho(law_of("case2"), 20000, 1000, 0x5eed0300ull, 4);
    CHECK(s.n_steps == 1000);
    CHECK(s.at_half.n == 20000);
    CHECK(std::fabs(s.at_half.estimate - 0.5) < 3.0 * s.at_half.se);
    CHECK(std::fabs(s.at_full.estimate - 0.5) < 3.0 * s.at_full.se);
  }

  // one-sided alpha < 1 family: nearly every path is positive, and the few
  // stragglers at 1e3 steps are gone by 1e4
  {
    const auto a = estimate_rho(law_of("c4"), 50000, 1000, 0xabc01ull, 4);
    const auto b = estimate_rho(law_of("c4"), 20000, 10000, 0xabc65ull, 4);
    CHECK(a.at_full.estimate > 0.999);
    CHECK(b.at_full.estimate > a.at_full.estimate);
  }

  // spectrally positive alpha = 1.5 with zero mean: the positivity
  // probability settles on the duality floor 1 - 1/alpha = 1/3
  {
    const auto s = estimate_rho(law_of("extreme"), 6000, 10000, 0x5eed0303ull, 4);
    CHECK(std::fabs(s.at_full.estimate - 1.0 / 3.0) < 3.0 * s.at_full.se);
  }
}

TEST_CASE("conditional overshoot") {
  // unit walk overshoot is exactly 1, so the eps R >= 1 tail is empty and
  // the eps = 0 tail is full
  {
    const auto co =
        conditional_overshoot(law_of("srw"), 4, 9, 0.2, 2000, 0x5eed0700ull, 2);
    CHECK(co.estimate.estimate == 0.0);
    CHECK(co.successes >= 100);
    CHECK(co.paths == 2000);
    const auto all =
        conditional_overshoot(law_of("srw"), 4, 9, 0.0, 2000, 0x5eed0700ull, 2);
    CHECK(all.estimate.estimate == 1.0);
  }

  // log-corrected alpha = 1 family: the conditional overshoot tail thins as
  // R grows (direction at unit scale; margins sit in the acceptance suite)
  {
    const auto near =
        conditional_overshoot(law_of("c3"), 250, 500, 0.5, 8000, 0xabc40ull, 4);
    const auto far = conditional_overshoot(law_of("c3"), 1000, 2000, 0.5, 8000,
                                           0xabc47ull, 4);
    CHECK(near.successes >= 100);
    CHECK(far.successes >= 100);
    CHECK(far.estimate.estimate < near.estimate.estimate);
  }

  // against the exact overshoot law, and decreasing in eps
  {
    const auto& law = law_of("c4");
    const auto sol = solve_exit(law, 1000);
    const auto ol = overshoot_law(law, 1000, 0, 16000);
    double prev = 1.0;
    for (const double eps : {1.0, 4.0, 16.0}) {
      const auto co =
          conditional_overshoot(law, 0, 1000, eps, 20000, 0x5eed0500ull, 4);
      double cum = 0.0;
      for (long long m = 1; m <= static_cast<long long>(eps * 1000.0); ++m)
        cum += ol.pmf[static_cast<std::size_t>(m)];
      const double exact = (sol.h[0] - cum) / sol.h[0];
      CHECK(std::fabs(co.estimate.estimate - exact) < 3.0 * co.estimate.se);
      CHECK(co.estimate.estimate < prev);
      prev = co.estimate.estimate;
    }
  }
}

TEST_CASE("reproducibility and scaling") {
  const auto& law = law_of("case2");
  const auto a = estimate_exit(law, 25, 100, 20000, 0x5eed0600ull, 4);
  const auto b = estimate_exit(law, 25, 100, 20000, 0x5eed0600ull, 4);
  CHECK(a.estimate == b.estimate);
  CHECK(a.se == b.se);

  // the shard count is part of the stream layout, not a scheduling detail
  const auto c = estimate_exit(law, 25, 100, 20000, 0x5eed0600ull, 5);
  CHECK(c.estimate != a.estimate);

  // quadrupling n halves the standard error (within 20%)
  const auto s1 = estimate_exit(law, 25, 100, 4000, 0x5eed0601ull, 4);
  const auto s4 = estimate_exit(law, 25, 100, 16000, 0x5eed0601ull, 4);
  CHECK(s4.se / s1.se > 0.4);
  CHECK(s4.se / s1.se < 0.6);
}

TEST_CASE("domain and breaker errors") {
  const auto& srw = law_of("srw");
  CHECK_THROWS_AS(estimate_exit(srw, -1, 9, 10, 1, 1), ConfigError);
  CHECK_THROWS_AS(estimate_exit(srw, 10, 9, 10, 1, 1), ConfigError);
  CHECK_THROWS_AS(estimate_exit(srw, 0, -1, 10, 1, 1), ConfigError);
  CHECK_THROWS_AS(estimate_exit(srw, 0, 9, 0, 1, 1), ConfigError);
  CHECK_THROWS_AS(estimate_exit(srw, 0, 9, 10, 1, 0), ConfigError);
  CHECK_THROWS_AS(estimate_rho(srw, 10, 1, 1, 1), ConfigError);
  CHECK_THROWS_AS(conditional_overshoot(srw, 4, 9, -0.5, 200, 1, 1),
                  ConfigError);
  CHECK_THROWS_AS(estimate_ladder(srw, 10, 1, 1, 0), ConfigError);

  // too few successful paths to condition on
  CHECK_THROWS_AS(conditional_overshoot(srw, 0, 50, 0.5, 300, 0x5eed0800ull, 1),
                  ConvergenceError);

  // a unit-step walk cannot cross half a billion lattice sites in 1e8 steps,
  // so the per-path circuit breaker fires deterministically
  CHECK_THROWS_AS(estimate_exit(srw, 500000000, 1000000000, 1, 0x1ull, 1),
                  ResourceError);

  // drift down: some ascending first-passage draw never crosses
  const auto drift = bounded_law({{-2, 0.5}, {1, 0.5}}, false);
  CHECK_THROWS_AS(estimate_ladder(drift, 3, 0x77001ull, 1, 64), ResourceError);
}

TEST_SUITE_END();
