#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "exitwalk/convolution.hpp"
#include "exitwalk/errors.hpp"
#include "exitwalk/increment_law.hpp"
#include "exitwalk/ladder.hpp"
#include "exitwalk/renewal.hpp"

using namespace exitwalk;

TEST_SUITE_BEGIN("renewal");

TEST_CASE("renewal recursion reproduces the hand computed sequence") {
  std::vector<double> f{0.0, 0.5, 0.5};
  const auto u = renewal_sequence(f, 5);
  const double want[] = {1.0, 0.5, 0.75, 0.625, 0.6875, 0.65625};
  REQUIRE(u.size() == 6);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(u[i] == doctest::Approx(want[i]).epsilon(1e-15));
}

TEST_CASE("series reciprocal matches the direct recursion") {
  // defective long-support law, dense enough to push the fft path
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const long long n = 4096;
  std::vector<double> f(static_cast<std::size_t>(n) + 1, 0.0);
  double mass = 0.0;
  for (std::size_t k = 1; k < f.size(); ++k) {
    f[k] = uni(rng) / std::pow(static_cast<double>(k), 1.3);
    mass += f[k];
  }
  for (std::size_t k = 1; k < f.size(); ++k) f[k] *= 0.93 / mass;

  std::vector<double> direct(static_cast<std::size_t>(n) + 1, 0.0);
  direct[0] = 1.0;
  for (std::size_t m = 1; m < direct.size(); ++m) {
    double s = 0.0;
    for (std::size_t k = 1; k <= m; ++k) s += f[k] * direct[m - k];
    direct[m] = s;
  }

  std::vector<double> a(f.size());
  a[0] = 1.0;
  for (std::size_t k = 1; k < f.size(); ++k) a[k] = -f[k];
  const auto inv = ps_inverse(a, a.size());
  for (std::size_t i = 0; i < direct.size(); ++i)
    CHECK(std::abs(inv[i] - direct[i]) <= 1e-12);

  // defective total: U(inf) = 1/(1 - 0.93), partial sums stay below it
  double cum = 0.0;
  for (double x : direct) cum += x;
  CHECK(cum < 1.0 / 0.07);
}

TEST_CASE("unit walk tables are flat and the green function is a stair") {
  const auto law = IncrementLaw::build(LawSpec::preset("srw"));
  LadderOptions lopt;
  lopt.horizon = 64;
  const LadderLaw lad = wiener_hopf_ladder(law, lopt);
  const RenewalTable t = build_tables(lad, 64);

  for (long long x = 0; x <= 64; ++x) {
    CHECK(t.u_a[static_cast<std::size_t>(x)] ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(t.v_d[static_cast<std::size_t>(x)] ==
          doctest::Approx(2.0).epsilon(1e-10));
    CHECK(t.U_a[static_cast<std::size_t>(x)] ==
          doctest::Approx(static_cast<double>(x + 1)).epsilon(1e-10));
    CHECK(t.V_d[static_cast<std::size_t>(x)] ==
          doctest::Approx(2.0 * static_cast<double>(x + 1)).epsilon(1e-10));
  }

  CHECK(spitzer_green(t, 3, 7) == doctest::Approx(8.0).epsilon(1e-10));
  CHECK(spitzer_green(t, 7, 3) == doctest::Approx(8.0).epsilon(1e-10));
  CHECK(spitzer_green(t, 0, 0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(green_row_sum(t, 2, 5) == doctest::Approx(30.0).epsilon(1e-10));
}

TEST_CASE("row sums close against the direct green sum") {
  const auto law = IncrementLaw::build(LawSpec::preset("case2"));
  LadderOptions lopt;
  lopt.horizon = 512;
  const LadderLaw lad = wiener_hopf_ladder(law, lopt);
  const RenewalTable t = build_tables(lad, 512);

  for (long long x : {0ll, 3ll, 17ll, 128ll, 400ll}) {
    for (long long r : {400ll, 512ll}) {
      if (r < x) continue;
      long double direct = 0.0L;
      for (long long y = 0; y <= r; ++y) direct += spitzer_green(t, x, y);
      const double closed = green_row_sum(t, x, r);
      CHECK(std::abs(static_cast<double>(direct) - closed) <=
            1e-10 * std::max(1.0, closed));
      CHECK(closed <= t.V_d[static_cast<std::size_t>(x)] *
                              t.U_a[static_cast<std::size_t>(r)] *
                              (1.0 + 1e-12));
    }
  }

  // tables never dip negative and the cumulatives climb
  for (std::size_t i = 0; i + 1 < t.U_a.size(); ++i) {
    CHECK(t.u_a[i] >= 0.0);
    CHECK(t.v_d[i] >= 0.0);
    CHECK(t.U_a[i + 1] >= t.U_a[i]);
    CHECK(t.V_d[i + 1] >= t.V_d[i]);
  }
}

TEST_CASE("table horizon cannot outrun the ladder") {
  const auto law = IncrementLaw::build(LawSpec::preset("srw"));
  LadderOptions lopt;
  lopt.horizon = 32;
  const LadderLaw lad = wiener_hopf_ladder(law, lopt);
  CHECK_THROWS_AS(build_tables(lad, 64), ConfigError);
  CHECK_THROWS_AS(build_tables(lad, -1), ConfigError);
  CHECK_THROWS_AS(spitzer_green(build_tables(lad, 32), 0, 40), ConfigError);
}

TEST_SUITE_END();
