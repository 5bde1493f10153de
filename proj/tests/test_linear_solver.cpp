#include <doctest.h>

#include <cmath>
#include <vector>

#include <exitwalk/errors.hpp>
#include <exitwalk/increment_law.hpp>
#include <exitwalk/linear_solver.hpp>

using namespace exitwalk;

namespace {

// b = (I - Q) u with extended precision, for manufactured-solution checks
std::vector<double> apply_system(const IncrementLaw& law, bool transpose,
                                 const std::vector<double>& u) {
  const long long n = static_cast<long long>(u.size());
  std::vector<double> b(u.size());
  for (long long i = 0; i < n; ++i) {
    long double acc = u[static_cast<size_t>(i)];
    for (long long j = 0; j < n; ++j)
      acc -= law.pmf(transpose ? i - j : j - i) * u[static_cast<size_t>(j)];
    b[static_cast<size_t>(i)] = static_cast<double>(acc);
  }
  return b;
}

std::vector<double> wiggle(long long n) {
  std::vector<double> u(static_cast<size_t>(n));
  for (long long i = 0; i < n; ++i)
    u[static_cast<size_t>(i)] = 1.0 + 0.5 * std::sin(0.37 * i) +
                                0.25 * std::cos(0.011 * i * i);
  return u;
}

} // namespace

TEST_SUITE("solver") {

TEST_CASE("gambler ruin closed form, banded and dense") {
  const auto law = IncrementLaw::build(LawSpec::preset("srw"));
  for (long long n : {200ll, 1000ll}) {
    std::vector<double> b(static_cast<size_t>(n), 0.0);
    b[static_cast<size_t>(n - 1)] = 0.5; // P[X > n-1-x] nonzero only at the top
    for (auto method : {SolveMethod::banded_lu, SolveMethod::dense_lu}) {
      if (method == SolveMethod::dense_lu && n > 500) continue;
      SolveOptions opt;
      opt.method = method;
      SolveReport rep;
      const auto u = solve_absorbing(law, n, b, opt, &rep);
      CHECK(rep.residual <= 1e-12);
      for (long long x : {0ll, 1ll, n / 2, n - 1}) {
        const double ref =
            static_cast<double>(x + 1) / static_cast<double>(n + 1);
        CHECK(u[static_cast<size_t>(x)] ==
              doctest::Approx(ref).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("srw visit counts via the transposed system") {
  // g(y) = expected visits to y from 0 before leaving [0, n), equals
  // 2 (n - y) / (n + 1) for the simple walk
  const auto law = IncrementLaw::build(LawSpec::preset("srw"));
  const long long n = 500;
  std::vector<double> b(static_cast<size_t>(n), 0.0);
  b[0] = 1.0;
  SolveOptions opt;
  opt.transpose = true;
  SolveReport rep;
  const auto g = solve_absorbing(law, n, b, opt, &rep);
  CHECK(rep.method == "banded_lu");
  for (long long y : {0ll, 1ll, 7ll, n / 2, n - 1}) {
    const double ref =
        2.0 * static_cast<double>(n - y) / static_cast<double>(n + 1);
    CHECK(g[static_cast<size_t>(y)] == doctest::Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("manufactured solutions agree across methods") {
  auto spec = LawSpec::preset("case2");
  spec.window_lo = -128;
  spec.window_hi = 128;
  const auto law = IncrementLaw::build(spec);
  const long long n = 520;
  const auto ustar = wiggle(n);
  const auto b = apply_system(law, false, ustar);

  SolveOptions dense;
  dense.method = SolveMethod::dense_lu;
  SolveReport dr;
  const auto ud = solve_absorbing(law, n, b, dense, &dr);

  SolveOptions krylov;
  krylov.method = SolveMethod::bicgstab_fft;
  krylov.tol = 1e-11;
  SolveReport kr;
  const auto uk = solve_absorbing(law, n, b, krylov, &kr);

  double dmax = 0.0, kmax = 0.0;
  for (size_t i = 0; i < ustar.size(); ++i) {
    dmax = std::max(dmax, std::fabs(ud[i] - ustar[i]));
    kmax = std::max(kmax, std::fabs(uk[i] - ustar[i]));
  }
  CHECK(dmax < 1e-9);
  CHECK(kmax < 1e-6);
  CHECK(dr.residual <= 1e-12);
  CHECK(kr.residual <= 1e-11);
}

TEST_CASE("transposed manufactured solution") {
  auto spec = LawSpec::preset("c4");
  spec.window_lo = -128;
  spec.window_hi = 128;
  const auto law = IncrementLaw::build(spec);
  const long long n = 300;
  const auto ustar = wiggle(n);
  const auto b = apply_system(law, true, ustar);
  SolveOptions opt;
  opt.transpose = true;
  opt.method = SolveMethod::dense_lu;
  const auto u = solve_absorbing(law, n, b, opt, nullptr);
  for (size_t i = 0; i < ustar.size(); i += 37)
    CHECK(u[i] == doctest::Approx(ustar[i]).epsilon(1e-9));
}

TEST_CASE("resource and convergence guards") {
  const auto law = IncrementLaw::build(LawSpec::preset("case2"));
  std::vector<double> b(2000, 1.0);
  SolveOptions tiny;
  tiny.method = SolveMethod::dense_lu;
  tiny.memory_limit_mb = 1;
  CHECK_THROWS_AS(solve_absorbing(law, 2000, b, tiny, nullptr), ResourceError);

  SolveOptions starved;
  starved.method = SolveMethod::bicgstab_fft;
  starved.max_iterations = 2;
  CHECK_THROWS_AS(solve_absorbing(law, 2000, b, starved, nullptr),
                  ConvergenceError);

  CHECK_THROWS_AS(solve_absorbing(law, 0, {}, {}, nullptr), ConfigError);
}

} // TEST_SUITE
