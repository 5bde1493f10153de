#include "exitwalk/exit_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "exitwalk/convolution.hpp"
#include "exitwalk/errors.hpp"
#include "exitwalk/linear_solver.hpp"

namespace exitwalk {

namespace {

SolveOptions interior_options(const ExitOptions& opt, bool transpose) {
  SolveOptions so;
  so.tol = std::max(opt.tol * 0.1, 1e-14);
  so.transpose = transpose;
  so.memory_limit_mb = opt.memory_limit_mb;
  return so;
}

void check_range(long long R, long long x, const char* who) {
  if (R < 1)
    throw ConfigError(std::string(who) + ": R must be at least 1");
  if (x < 0 || x > R)
    throw ConfigError(std::string(who) + ": start point outside [0, R]");
}

} // namespace

ExitSolution solve_exit(const IncrementLaw& law, long long R,
                        const ExitOptions& opt) {
  if (R < 1) throw ConfigError("solve_exit: R must be at least 1");
  const long long n = R + 1;

  ExitSolution sol;
  sol.R = R;
  sol.law_hash = law.hash();
  sol.success_col.resize(static_cast<std::size_t>(n));
  sol.failure_col.resize(static_cast<std::size_t>(n));
  for (long long x = 0; x < n; ++x) {
    sol.success_col[static_cast<std::size_t>(x)] = law.tail_above(R - x);
    sol.failure_col[static_cast<std::size_t>(x)] = law.tail_below(x);
  }

  SolveReport rep_ok, rep_fail;
  const SolveOptions so = interior_options(opt, false);
  sol.h = solve_absorbing(law, n, sol.success_col, so, &rep_ok);
  sol.h_fail = solve_absorbing(law, n, sol.failure_col, so, &rep_fail);
  sol.method = rep_ok.method;
  sol.residual = std::max(rep_ok.residual, rep_fail.residual);
  if (sol.residual > opt.tol)
    throw NumericError("solve_exit: interior solve residual above tolerance");

  for (long long x = 0; x < n; ++x) {
    const double hx = sol.h[static_cast<std::size_t>(x)];
    if (!(hx > 0.0) || !(hx < 1.0))
      throw InvariantError("solve_exit: exit probability left (0, 1)");
    if (x > 0 && hx < sol.h[static_cast<std::size_t>(x - 1)] - 1e-12)
      throw InvariantError("solve_exit: exit probability not monotone in x");
    const double slack =
        hx + sol.h_fail[static_cast<std::size_t>(x)] - 1.0;
    if (std::abs(slack) > 1e-10)
      throw InvariantError(
          "solve_exit: success and failure solves do not complement");
  }

  if (opt.want_green) {
    if (n > 4096)
      throw ResourceError(
          "solve_exit: full fundamental matrix refused above R = 4095; "
          "use exit_green_row for single starting points");
    const std::size_t bytes = static_cast<std::size_t>(n) *
                              static_cast<std::size_t>(n) * sizeof(double);
    if (bytes > opt.memory_limit_mb * std::size_t(1024) * 1024)
      throw ResourceError("solve_exit: fundamental matrix over memory budget");
    Eigen::MatrixXd T(n, n);
    for (long long i = 0; i < n; ++i)
      for (long long j = 0; j < n; ++j)
        T(i, j) = (i == j ? 1.0 : 0.0) - law.pmf(j - i);
    const Eigen::MatrixXd G = Eigen::PartialPivLU<Eigen::MatrixXd>(T).inverse();
    sol.green2.resize(static_cast<std::size_t>(n) * n);
    for (long long i = 0; i < n; ++i)
      for (long long j = 0; j < n; ++j)
        sol.green2[static_cast<std::size_t>(i) * n + j] = G(i, j);
  }
  return sol;
}

std::vector<double> exit_green_row(const IncrementLaw& law, long long R,
                                   long long x, const ExitOptions& opt) {
  check_range(R, x, "exit_green_row");
  const long long n = R + 1;
  std::vector<double> b(static_cast<std::size_t>(n), 0.0);
  b[static_cast<std::size_t>(x)] = 1.0;
  SolveReport rep;
  std::vector<double> row =
      solve_absorbing(law, n, b, interior_options(opt, true), &rep);
  if (rep.residual > opt.tol)
    throw NumericError("exit_green_row: solve residual above tolerance");
  for (double& g : row) g = std::max(g, 0.0);
  return row;
}

namespace {

// Success-overshoot pmf over m in [1, m_max] from a visit row:
//   P_x[S_exit = R + m, success] = sum_z row[z] p(R + m - z).
std::vector<double> overshoot_from_row(const IncrementLaw& law,
                                       const std::vector<double>& row,
                                       long long m_max) {
  std::vector<double> rrev(row.size());
  for (std::size_t u = 0; u < row.size(); ++u)
    rrev[u] = row[row.size() - 1 - u];
  const std::vector<double> conv = correlate_kernel(
      rrev, [&](long long t) { return law.pmf(t); }, 1,
      static_cast<std::size_t>(m_max));
  std::vector<double> pmf(static_cast<std::size_t>(m_max) + 1, 0.0);
  for (long long m = 1; m <= m_max; ++m)
    pmf[static_cast<std::size_t>(m)] =
        std::max(0.0, conv[static_cast<std::size_t>(m - 1)]);
  return pmf;
}

double overshoot_tail_from_row(const IncrementLaw& law,
                               const std::vector<double>& row, long long R,
                               long long m_cap) {
  double tail = 0.0;
  for (std::size_t z = 0; z < row.size(); ++z)
    tail += row[z] * law.tail_above(R + m_cap - static_cast<long long>(z));
  return tail;
}

} // namespace

OvershootLaw overshoot_law(const IncrementLaw& law, long long R, long long x,
                           long long m_max, const ExitOptions& opt) {
  check_range(R, x, "overshoot_law");
  if (m_max < 1) throw ConfigError("overshoot_law: m_max must be at least 1");
  const std::vector<double> row = exit_green_row(law, R, x, opt);

  OvershootLaw out;
  out.R = R;
  out.x = x;
  out.pmf = overshoot_from_row(law, row, m_max);
  out.tail = overshoot_tail_from_row(law, row, R, m_max);
  double s = 0.0;
  for (double v : out.pmf) s += v;
  out.total = s + out.tail;
  return out;
}

MartingaleCheck martingale_functional(const IncrementLaw& law, long long R,
                                      long long x, const RenewalTable& table,
                                      const ExitOptions& opt) {
  check_range(R, x, "martingale_functional");
  if (table.horizon <= R)
    throw ConfigError(
        "martingale_functional: renewal table horizon must exceed R");
  const long long m_cap = table.horizon - R;
  const std::vector<double> row = exit_green_row(law, R, x, opt);
  const std::vector<double> pmf = overshoot_from_row(law, row, m_cap);

  double raw = 0.0;
  for (long long m = m_cap; m >= 1; --m)
    raw += table.V_d[static_cast<std::size_t>(R + m)] *
           pmf[static_cast<std::size_t>(m)];

  const double tail = overshoot_tail_from_row(law, row, R, m_cap);
  const double v_last = table.V_d[static_cast<std::size_t>(table.horizon)];
  // Close the mass past the horizon with the last table value, plus a linear
  // term from the final slope when the walk has enough moment to price the
  // mean excess. V_d is concave for these walks, so the slope term caps the
  // true contribution; without it the closure is a floor.
  double remainder = tail * v_last;
  if (tail > 0.0 && law.mean_above_finite()) {
    double excess = 0.0;
    for (std::size_t z = 0; z < row.size(); ++z)
      excess += row[z] * law.eta_plus(static_cast<double>(
                             R + m_cap - static_cast<long long>(z)));
    const double slope =
        table.v_d[static_cast<std::size_t>(table.horizon)];
    remainder += slope * excess;
  }

  MartingaleCheck out;
  out.raw_sum = raw;
  out.remainder = remainder;
  out.value = raw + remainder;
  out.target = table.V_d[static_cast<std::size_t>(x)];
  out.rel_error = std::abs(out.value - out.target) / out.target;
  return out;
}

double hitting_before_ruin(const RenewalTable& table, long long x,
                           long long R) {
  check_range(R, x, "hitting_before_ruin");
  if (R > table.horizon)
    throw ConfigError("hitting_before_ruin: R beyond the table horizon");
  return spitzer_green(table, x, R) / spitzer_green(table, R, R);
}

std::vector<double> ratio_profile(const ExitSolution& sol,
                                  const RenewalTable& table) {
  if (sol.R > table.horizon)
    throw ConfigError("ratio_profile: R beyond the table horizon");
  const double VR = table.V_d[static_cast<std::size_t>(sol.R)];
  std::vector<double> out(sol.h.size());
  for (std::size_t x = 0; x < sol.h.size(); ++x)
    out[x] = sol.h[x] * VR / table.V_d[x];
  return out;
}

} // namespace exitwalk
