#include <cmath>
#include <map>
#include <vector>

#include <doctest.h>

#include "exitwalk/errors.hpp"
#include "exitwalk/increment_law.hpp"
#include "exitwalk/ladder.hpp"

using namespace exitwalk;

namespace {

IncrementLaw bounded_law(std::map<long long, double> pmf, bool zero_mean) {
  LawSpec s;
  s.family = Family::bounded;
  s.pmf = std::move(pmf);
  s.zero_mean = zero_mean;
  return IncrementLaw::build(s);
}

double tv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    s += std::abs(x - y);
  }
  return 0.5 * s;
}

} // namespace

TEST_SUITE_BEGIN("ladder");

TEST_CASE("unit walk ladder is the fixed point after two sweeps") {
  const auto law = IncrementLaw::build(LawSpec::preset("srw"));
  LadderOptions opt;
  opt.horizon = 16;
  const LadderLaw lad = wiener_hopf_ladder(law, opt);

  CHECK(lad.v0 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(lad.iterations <= 2);
  CHECK(lad.z_pmf[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lad.zhat_pmf[1] == doctest::Approx(1.0).epsilon(1e-12));
  for (long long m = 2; m <= 16; ++m) {
    CHECK(lad.z_pmf[static_cast<std::size_t>(m)] <= 1e-14);
    CHECK(lad.zhat_pmf[static_cast<std::size_t>(m)] <= 1e-14);
  }
  CHECK(lad.z_defect <= 1e-12);
  CHECK(lad.zhat_defect <= 1e-12);
}

TEST_CASE("unit walk first passage carries the ruin defect") {
  const auto law = IncrementLaw::build(LawSpec::preset("srw"));
  FirstPassageOptions opt;
  opt.depth = 64;
  const auto res = first_passage_up(law, 4, opt);
  // killed on reaching -64, the up entry happens unless the walk loses a
  // gambler's duel against barriers +1 and -64
  CHECK(res.pmf[1] == doctest::Approx(64.0 / 65.0).epsilon(1e-11));
  CHECK(res.defect == doctest::Approx(1.0 / 65.0).epsilon(1e-9));
  CHECK(res.pmf[2] <= 1e-14);

  FirstPassageOptions deeper;
  deeper.depth = 128;
  const auto res2 = first_passage_up(law, 4, deeper);
  CHECK(res2.pmf[1] >= res.pmf[1]); // monotone refinement in depth
  CHECK(res2.pmf[1] == doctest::Approx(128.0 / 129.0).epsilon(1e-11));
}

TEST_CASE("down jumps of two leave the golden section for the up entry") {
  const auto law = bounded_law({{-2, 0.5}, {1, 0.5}}, false);
  const double gold = (std::sqrt(5.0) - 1.0) / 2.0;

  FirstPassageOptions opt;
  opt.depth = 512;
  const auto fp = first_passage_up(law, 8, opt);
  CHECK(fp.pmf[1] == doctest::Approx(gold).epsilon(1e-10));
  CHECK(fp.defect == doctest::Approx(1.0 - gold).epsilon(1e-9));

  LadderOptions lopt;
  lopt.horizon = 64;
  const LadderLaw lad = wiener_hopf_ladder(law, lopt);
  CHECK(lad.z_pmf[1] == doctest::Approx(gold).epsilon(1e-7));
  CHECK(lad.z_defect == doctest::Approx(1.0 - gold).epsilon(1e-6));
}

TEST_CASE("zero mean skip free walks climb with a sure unit ladder") {
  // up moves are unit jumps, so Z = 1 a.s.; v0 = 3/2 comes out exactly
  const auto law = bounded_law({{-2, 1.0 / 3.0}, {1, 2.0 / 3.0}}, true);

  LadderOptions lopt;
  lopt.horizon = 64;
  const LadderLaw lad = wiener_hopf_ladder(law, lopt);
  CHECK(lad.v0 == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(lad.z_pmf[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(lad.z_defect <= 1e-9);

  const auto fp = first_passage_up(law, 8);
  CHECK(fp.extrapolated[1] == doctest::Approx(1.0).epsilon(1e-7));

  // mirrored masses push the sure unit ladder to the descending side
  const auto mir = bounded_law({{-1, 2.0 / 3.0}, {2, 1.0 / 3.0}}, true);
  const LadderLaw mlad = wiener_hopf_ladder(mir, lopt);
  CHECK(mlad.zhat_pmf[1] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(mlad.zhat_defect <= 1e-8);
  const auto fpd = first_passage_down(mir, 8);
  CHECK(fpd.extrapolated[1] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("factorization and first passage agree on a bounded mix") {
  const auto law = bounded_law(
      {{-2, 0.2}, {-1, 0.2}, {0, 0.2}, {1, 0.2}, {2, 0.2}}, true);

  LadderOptions lopt;
  lopt.horizon = 64;
  const LadderLaw lad = wiener_hopf_ladder(law, lopt);

  const auto fp = first_passage_up(law, 64);
  CHECK(tv(lad.z_pmf, fp.extrapolated) <= 1e-8);

  const auto fpd = first_passage_down(law, 64);
  CHECK(tv(lad.zhat_pmf, fpd.extrapolated) <= 1e-8);

  // the walk is symmetric, so the two ladders coincide
  CHECK(tv(lad.z_pmf, lad.zhat_pmf) <= 1e-9);
}

TEST_CASE("v0 routes agree and the unit walk series hits 2") {
  const auto srw = IncrementLaw::build(LawSpec::preset("srw"));
  const auto ent = v0_entrance(srw);
  CHECK(ent.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ent.lower <= ent.value);
  CHECK(ent.upper >= ent.value);

  const auto ser = v0_series(srw, 10000);
  CHECK(ser.period == 2);
  CHECK(ser.value == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(ser.raw_value < ser.value); // bare truncation visibly undershoots
  CHECK(ser.raw_value > 1.9);
  CHECK(ser.last_term > 0.0);

  // lazy variant: half the mass idles, v0 = 4 by the doubled return series
  const auto lazy = bounded_law({{-1, 0.25}, {0, 0.5}, {1, 0.25}}, true);
  const auto lent = v0_entrance(lazy);
  CHECK(lent.value == doctest::Approx(4.0).epsilon(1e-10));
  const auto lser = v0_series(lazy, 10000);
  CHECK(lser.period == 1);
  CHECK(std::abs(lser.value - lent.value) <= 1e-4);

  // skip free: period three returns, exact entrance value 3/2
  const auto skip = bounded_law({{-2, 1.0 / 3.0}, {1, 2.0 / 3.0}}, true);
  const auto sent = v0_entrance(skip);
  CHECK(sent.value == doctest::Approx(1.5).epsilon(1e-10));
  const auto sser = v0_series(skip, 10000);
  CHECK(sser.period == 3);
  CHECK(std::abs(sser.value - sent.value) <= 1e-4);

  const auto mix = bounded_law(
      {{-2, 0.2}, {-1, 0.2}, {0, 0.2}, {1, 0.2}, {2, 0.2}}, true);
  CHECK(std::abs(v0_series(mix, 10000).value - v0_entrance(mix).value) <=
        1e-4);
}

TEST_CASE("heavy symmetric family cross validates within its defects") {
  const auto law = IncrementLaw::build(LawSpec::preset("case2"));

  LadderOptions lopt;
  lopt.horizon = 256;
  const LadderLaw lad = wiener_hopf_ladder(law, lopt);
  CHECK(lad.v0 > 1.0);
  CHECK(lad.z_defect > 0.0); // heavy overshoot mass lives past any horizon

  FirstPassageOptions fopt;
  fopt.depth = 4096;
  const auto fp = first_passage_up(law, 256, fopt);

  const double dist = tv(lad.z_pmf, fp.pmf);
  CHECK(dist <= 1e-6 + lad.z_defect + fp.defect);
  CHECK(dist <= 5e-3); // regression guard on the actual gap

  // symmetric law: both ladders match and both routes see it
  CHECK(tv(lad.z_pmf, lad.zhat_pmf) <= 1e-8);

  // properness trend: wider horizon strictly reduces the missing mass
  LadderOptions wide = lopt;
  wide.horizon = 512;
  const LadderLaw lad2 = wiener_hopf_ladder(law, wide);
  CHECK(lad2.z_defect <= lad.z_defect);
  CHECK(lad2.zhat_defect <= lad.zhat_defect);

  // monotone refinement in the kill depth, entry by entry
  FirstPassageOptions shallow;
  shallow.depth = 1024;
  const auto fp1 = first_passage_up(law, 64, shallow);
  FirstPassageOptions deep;
  deep.depth = 2048;
  const auto fp2 = first_passage_up(law, 64, deep);
  for (std::size_t m = 1; m < fp1.pmf.size(); ++m)
    CHECK(fp2.pmf[m] >= fp1.pmf[m] - 1e-13);
}

TEST_CASE("drifting tail families keep proper ladders on the pull side") {
  // c4 drifts to +inf: the ascending ladder is proper, the descending one
  // is defective even at infinite horizon
  const auto law = IncrementLaw::build(LawSpec::preset("c4"));
  LadderOptions lopt;
  lopt.horizon = 256;
  const LadderLaw lad = wiener_hopf_ladder(law, lopt);
  CHECK(lad.v0 > 1.0);
  CHECK(lad.zhat_defect > 0.05);
  CHECK(lad.z_defect < lad.zhat_defect);
}

TEST_CASE("bad ladder configs refuse") {
  const auto law = IncrementLaw::build(LawSpec::preset("srw"));
  LadderOptions bad;
  bad.horizon = 0;
  CHECK_THROWS_AS(wiener_hopf_ladder(law, bad), ConfigError);
  CHECK_THROWS_AS(first_passage_up(law, 0), ConfigError);
  CHECK_THROWS_AS(v0_series(law, 0), ConfigError);

  LadderOptions stall;
  stall.horizon = 16;
  stall.max_iterations = 2;
  stall.tol = 1e-30;
  CHECK_THROWS_AS(wiener_hopf_ladder(IncrementLaw::build(LawSpec::preset(
                                         "case2")),
                                     stall),
                  ConvergenceError);
}

TEST_SUITE_END();
