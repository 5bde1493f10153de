#include "exitwalk/increment_law.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <vector>

#include "exitwalk/errors.hpp"
#include "exitwalk/power_tails.hpp"

namespace exitwalk {

namespace {

constexpr long long kTableCapMax = 1ll << 20;

bool weight_summable(double s, double g) {
  return s > 1.0 + 1e-12 || (std::fabs(s - 1.0) <= 1e-12 && g >= 2.0 - 1e-12);
}

} // namespace

struct IncrementLaw::Impl {
  LawSpec spec;
  std::uint64_t law_hash = 0;

  long long lo = 0, hi = 0;
  std::vector<double> win;  // pmf on [lo..hi]
  double win_mass = 0.0;

  bool power_tails = false;
  double c_plus = 0.0, c_minus = 0.0;
  PowerLogWeight mass_w_plus{2.0, 0.0};   // exponent 1 + alpha_right
  PowerLogWeight mass_w_minus{2.0, 0.0};  // exponent 1 + alpha_left

  double index = 2.0;
  double p_bal = 0.5, q_bal = 0.5;
  bool mean_right = true, mean_left = true;
  double mean_val = 0.0;

  // integer tail tables, grown on demand: above[n] = P[X > n]
  mutable std::vector<double> above, below;
  // eta_above[j] = sum_{i >= j} above[i] (and mirrored)
  mutable std::vector<double> eta_above, eta_below;
  mutable std::mutex mu;

  double analytic_pmf(long long k) const {
    if (!power_tails || k == 0) return 0.0;
    if (k > 0) return c_plus * mass_w_plus.value(static_cast<double>(k));
    return c_minus * mass_w_minus.value(static_cast<double>(-k));
  }

  double pmf_at(long long k) const {
    if (k >= lo && k <= hi) return win[static_cast<size_t>(k - lo)];
    return analytic_pmf(k);
  }

  double analytic_above(long long n) const {
    // valid for n >= hi (beyond the stored window)
    if (!power_tails) return 0.0;
    return c_plus * power_log_tail_sum(mass_w_plus, n);
  }
  double analytic_below(long long n) const {
    if (!power_tails) return 0.0;
    return c_minus * power_log_tail_sum(mass_w_minus, n);
  }

  // requires mu held
  void ensure_table(std::vector<double>& t, long long n, bool right) const {
    const long long edge = right ? hi : -lo;
    if (t.empty()) {
      const long long cap = std::max<long long>(edge + 2, 512);
      t.resize(static_cast<size_t>(cap));
      t[cap - 1] = right ? analytic_above(cap - 1) : analytic_below(cap - 1);
      for (long long j = cap - 1; j >= 1; --j)
        t[j - 1] = t[j] + pmf_at(right ? j : -j);
    }
    while (static_cast<long long>(t.size()) <= n) {
      const long long oldc = static_cast<long long>(t.size());
      if (n + 1 > kTableCapMax)
        throw ResourceError("tail table beyond 2^20 entries; use the "
                            "analytic branch instead");
      const long long cap = std::min(std::max(2 * oldc, n + 1), kTableCapMax);
      t.resize(static_cast<size_t>(cap));
      t[cap - 1] = right ? analytic_above(cap - 1) : analytic_below(cap - 1);
      for (long long j = cap - 1; j > oldc; --j)
        t[j - 1] = t[j] + pmf_at(right ? j : -j);
    }
  }

  double tail_above_int(long long n) const {
    if (n < 0) return 1.0 - tail_below_int(-n - 1);
    if (!power_tails && n >= hi) return 0.0;
    if (power_tails && n >= kTableCapMax / 2) return analytic_above(n);
    std::lock_guard<std::mutex> g(mu);
    ensure_table(above, n, true);
    return above[static_cast<size_t>(n)];
  }
  double tail_below_int(long long n) const {
    if (n < 0) return 1.0 - tail_above_int(-n - 1);
    if (!power_tails && n >= -lo) return 0.0;
    if (power_tails && n >= kTableCapMax / 2) return analytic_below(n);
    std::lock_guard<std::mutex> g(mu);
    ensure_table(below, n, false);
    return below[static_cast<size_t>(n)];
  }

  // sum_{i >= J} P[X > i] = sum_{k > J} (k - J) p(k)
  double eta_closure(long long J, bool right) const {
    if (!power_tails) {
      const long long edge = right ? hi : -lo;
      long double acc = 0.0;
      for (long long k = J + 1; k <= edge; ++k)
        acc += static_cast<long double>(k - J) * pmf_at(right ? k : -k);
      return static_cast<double>(acc);
    }
    const auto& w = right ? mass_w_plus : mass_w_minus;
    const double c = right ? c_plus : c_minus;
    const PowerLogWeight first{w.s - 1.0, w.g};
    return c * (power_log_tail_sum(first, J) -
                static_cast<double>(J) * power_log_tail_sum(w, J));
  }

  // requires mean on that side; requires mu held
  void ensure_eta(std::vector<double>& e, long long n, bool right) const {
    if (static_cast<long long>(e.size()) > n) return;
    const long long cap =
        std::max<long long>(std::max<long long>(2 * e.size(), n + 1), 64);
    if (cap > kTableCapMax)
      throw ResourceError("eta table beyond 2^20 entries");
    ensure_table(right ? above : below, cap - 1, right);
    const auto& t = right ? above : below;
    e.assign(static_cast<size_t>(cap), 0.0);
    long double acc = eta_closure(cap - 1, right);
    e[static_cast<size_t>(cap - 1)] = static_cast<double>(acc);
    for (long long j = cap - 2; j >= 0; --j) {
      acc += t[static_cast<size_t>(j)];
      e[static_cast<size_t>(j)] = static_cast<double>(acc);
    }
  }

  void require_right_mean(const char* what) const {
    if (!mean_right)
      throw CapabilityError(std::string(what) +
                            " needs E[X^+] < inf, but the right tail index "
                            "is " +
                            std::to_string(spec.alpha));
  }
  void require_left_mean(const char* what) const {
    if (!mean_left)
      throw CapabilityError(std::string(what) +
                            " needs E[X^-] < inf, but the left tail index "
                            "is " +
                            std::to_string(spec.left_alpha));
  }
};

IncrementLaw IncrementLaw::build(const LawSpec& raw) {
  const LawSpec s = raw.resolved();
  auto impl = std::make_shared<Impl>();
  impl->spec = s;
  impl->law_hash = s.hash();
  impl->lo = s.window_lo;
  impl->hi = s.window_hi;
  impl->win.assign(static_cast<size_t>(impl->hi - impl->lo + 1), 0.0);

  const bool pareto = s.family == Family::pareto_two_sided ||
                      s.family == Family::pareto_log_corrected;

  if (pareto) {
    impl->power_tails = true;
    impl->mass_w_plus = PowerLogWeight{1.0 + s.alpha, s.log_pow};
    impl->mass_w_minus = PowerLogWeight{1.0 + s.left_alpha, s.left_log_pow};
    const double sp = power_log_tail_sum(impl->mass_w_plus, 0);
    const double sm = power_log_tail_sum(impl->mass_w_minus, 0);
    const double m0 = 1.0 - s.mass_at_zero;
    impl->c_plus = m0 / (sp + s.left_weight * sm);
    impl->c_minus = s.left_weight * impl->c_plus;
    for (long long k = impl->lo; k <= impl->hi; ++k) {
      impl->win[static_cast<size_t>(k - impl->lo)] =
          k == 0 ? s.mass_at_zero : impl->analytic_pmf(k);
    }
    impl->mean_right = weight_summable(s.alpha, s.log_pow);
    impl->mean_left = weight_summable(s.left_alpha, s.left_log_pow);
    impl->index = std::min(s.alpha, s.left_alpha);
  } else {
    for (const auto& [k, v] : s.pmf)
      impl->win[static_cast<size_t>(k - impl->lo)] = v;
    impl->index = 2.0;
  }
  impl->p_bal = s.p;
  impl->q_bal = 1.0 - s.p;

  // raw mean, including analytic tail first moments
  double mu = 0.0;
  bool mean_known = impl->mean_right && impl->mean_left;
  if (mean_known) {
    long double acc = 0.0;
    for (long long k = impl->lo; k <= impl->hi; ++k)
      acc += static_cast<long double>(k) *
             impl->win[static_cast<size_t>(k - impl->lo)];
    if (impl->power_tails) {
      acc += impl->c_plus *
             power_log_tail_sum(PowerLogWeight{s.alpha, s.log_pow}, impl->hi);
      acc -= impl->c_minus *
             power_log_tail_sum(PowerLogWeight{s.left_alpha, s.left_log_pow},
                                -impl->lo);
    }
    mu = static_cast<double>(acc);
  }

  if (s.zero_mean) {
    if (!impl->mean_right)
      throw CapabilityError("zero-mean centering impossible: E[X^+] diverges "
                            "at right tail index " +
                            std::to_string(s.alpha));
    if (!impl->mean_left)
      throw CapabilityError("zero-mean centering impossible: E[X^-] diverges "
                            "at left tail index " +
                            std::to_string(s.left_alpha));
    if (!pareto) {
      // explicit pmfs are taken as given: verify instead of adjusting
      if (std::fabs(mu) > 1e-12)
        throw ConfigError("explicit pmf has mean " + std::to_string(mu) +
                          "; declare centering 'none' or fix the masses");
      mu = 0.0;
    } else if (std::fabs(mu) > 0.0) {
      if (impl->lo > -1 || impl->hi < 1)
        throw ConfigError("window must cover [-1, 1] to absorb centering");
      const double a = mu / 2.0;
      double& up = impl->win[static_cast<size_t>(1 - impl->lo)];
      double& dn = impl->win[static_cast<size_t>(-1 - impl->lo)];
      up -= a;
      dn += a;
      if (up < 0.0 || dn < 0.0)
        throw ConfigError("masses at -1/+1 cannot absorb the centering shift "
                          "of " +
                          std::to_string(a) +
                          "; raise mass_at_zero or rebalance the family");
      mu = 0.0;
    }
  }
  impl->mean_val = mu;

  // support sanity: mass on both sides, lattice span 1
  bool has_pos = impl->power_tails, has_neg = impl->power_tails;
  long long g = impl->power_tails ? 1 : 0;
  for (long long k = impl->lo; k <= impl->hi; ++k) {
    if (impl->win[static_cast<size_t>(k - impl->lo)] <= 0.0 || k == 0)
      continue;
    has_pos = has_pos || k > 0;
    has_neg = has_neg || k < 0;
    g = std::gcd(g, std::llabs(k));
  }
  if (!has_pos || !has_neg)
    throw ConfigError("law must place mass on both sides of the origin");
  if (g != 1)
    throw ConfigError("support magnitudes have gcd " + std::to_string(g) +
                      "; the walk would live on a sublattice");

  long double wm = 0.0;
  for (double v : impl->win) wm += v;
  impl->win_mass = static_cast<double>(wm);
  const double total = impl->win_mass + impl->analytic_above(impl->hi) +
                       impl->analytic_below(-impl->lo);
  if (std::fabs(total - 1.0) > 1e-12)
    throw InvariantError("law mass sums to " + std::to_string(total) +
                         ", expected 1");

  IncrementLaw law;
  law.impl_ = std::move(impl);
  return law;
}

double IncrementLaw::pmf(long long k) const { return impl_->pmf_at(k); }

double IncrementLaw::tail_above(long long n) const {
  return impl_->tail_above_int(n);
}
double IncrementLaw::tail_below(long long n) const {
  return impl_->tail_below_int(n);
}

double IncrementLaw::right_tail(double x) const {
  if (x >= 4.0e18) { // floor would overflow long long
    if (!impl_->power_tails) return 0.0;
    throw ConfigError("tail argument exceeds the lattice range");
  }
  return impl_->tail_above_int(static_cast<long long>(std::floor(x)));
}
double IncrementLaw::left_tail(double x) const {
  if (x >= 4.0e18) {
    if (!impl_->power_tails) return 0.0;
    throw ConfigError("tail argument exceeds the lattice range");
  }
  return impl_->tail_below_int(static_cast<long long>(std::floor(x)));
}
TwoTails IncrementLaw::tails(double x) const {
  TwoTails t;
  t.above = right_tail(x);
  t.below = left_tail(x);
  t.both = t.above + t.below;
  return t;
}

const LawSpec& IncrementLaw::spec() const { return impl_->spec; }
Family IncrementLaw::family() const { return impl_->spec.family; }
std::uint64_t IncrementLaw::hash() const { return impl_->law_hash; }
std::string IncrementLaw::hash_hex() const { return impl_->spec.hash_hex(); }

double IncrementLaw::stable_index() const { return impl_->index; }
double IncrementLaw::balance_p() const { return impl_->p_bal; }
double IncrementLaw::balance_q() const { return impl_->q_bal; }
bool IncrementLaw::is_bounded() const { return !impl_->power_tails; }
bool IncrementLaw::declared_zero_mean() const { return impl_->spec.zero_mean; }

long long IncrementLaw::window_lo() const { return impl_->lo; }
long long IncrementLaw::window_hi() const { return impl_->hi; }
double IncrementLaw::window_mass() const { return impl_->win_mass; }

bool IncrementLaw::mean_above_finite() const { return impl_->mean_right; }
bool IncrementLaw::mean_below_finite() const { return impl_->mean_left; }

double IncrementLaw::mean() const {
  impl_->require_right_mean("mean");
  impl_->require_left_mean("mean");
  return impl_->mean_val;
}

double IncrementLaw::A(double x) const {
  if (x < 0) throw ConfigError("A(x) needs x >= 0");
  const long long J = static_cast<long long>(std::floor(x));
  std::lock_guard<std::mutex> g(impl_->mu);
  impl_->ensure_table(impl_->above, J, true);
  impl_->ensure_table(impl_->below, J, false);
  long double acc = 0.0;
  for (long long j = 0; j < J; ++j)
    acc += impl_->above[static_cast<size_t>(j)] -
           impl_->below[static_cast<size_t>(j)];
  acc += (x - static_cast<double>(J)) *
         (impl_->above[static_cast<size_t>(J)] -
          impl_->below[static_cast<size_t>(J)]);
  return static_cast<double>(acc);
}

double IncrementLaw::eta_plus(double x) const {
  if (x < 0) throw ConfigError("eta_plus(x) needs x >= 0");
  impl_->require_right_mean("eta_plus");
  const long long J = static_cast<long long>(std::floor(x));
  std::lock_guard<std::mutex> g(impl_->mu);
  impl_->ensure_eta(impl_->eta_above, J + 1, true);
  const double tail = impl_->eta_above[static_cast<size_t>(J + 1)];
  return (static_cast<double>(J) + 1.0 - x) *
             impl_->above[static_cast<size_t>(J)] +
         tail;
}

double IncrementLaw::eta_minus(double x) const {
  if (x < 0) throw ConfigError("eta_minus(x) needs x >= 0");
  impl_->require_left_mean("eta_minus");
  const long long J = static_cast<long long>(std::floor(x));
  std::lock_guard<std::mutex> g(impl_->mu);
  impl_->ensure_eta(impl_->eta_below, J + 1, false);
  const double tail = impl_->eta_below[static_cast<size_t>(J + 1)];
  return (static_cast<double>(J) + 1.0 - x) *
             impl_->below[static_cast<size_t>(J)] +
         tail;
}

namespace {

// int_0^x of a piecewise-linear eta with slope -tail on each unit panel
double m_integral(const std::vector<double>& eta,
                  const std::vector<double>& tail, double x) {
  const long long J = static_cast<long long>(std::floor(x));
  long double acc = 0.0;
  for (long long j = 0; j < J; ++j)
    acc += eta[static_cast<size_t>(j)] - 0.5 * tail[static_cast<size_t>(j)];
  const double f = x - static_cast<double>(J);
  acc += f * eta[static_cast<size_t>(J)] -
         0.5 * f * f * tail[static_cast<size_t>(J)];
  return static_cast<double>(acc);
}

} // namespace

double IncrementLaw::m_plus(double x) const {
  if (x < 0) throw ConfigError("m_plus(x) needs x >= 0");
  impl_->require_right_mean("m_plus");
  const long long J = static_cast<long long>(std::floor(x));
  std::lock_guard<std::mutex> g(impl_->mu);
  impl_->ensure_eta(impl_->eta_above, J + 1, true);
  return m_integral(impl_->eta_above, impl_->above, x);
}

double IncrementLaw::m_minus(double x) const {
  if (x < 0) throw ConfigError("m_minus(x) needs x >= 0");
  impl_->require_left_mean("m_minus");
  const long long J = static_cast<long long>(std::floor(x));
  std::lock_guard<std::mutex> g(impl_->mu);
  impl_->ensure_eta(impl_->eta_below, J + 1, false);
  return m_integral(impl_->eta_below, impl_->below, x);
}

double IncrementLaw::m(double x) const { return m_plus(x) + m_minus(x); }

namespace {

long long quantile_search(const std::vector<double>& t, long long from,
                          double u) {
  // smallest k >= from with t[k] <= u; t decreasing, t[from-1] > u
  long long lo = from, hi = static_cast<long long>(t.size()) - 1;
  while (lo < hi) {
    const long long mid = lo + (hi - lo) / 2;
    if (t[static_cast<size_t>(mid)] <= u)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

} // namespace

long long IncrementLaw::quantile_above(double u) const {
  if (!impl_->power_tails)
    throw NumericError("law has no analytic exterior above the window");
  if (!(u > 0.0))
    throw NumericError("tail quantile needs u > 0");
  {
    std::lock_guard<std::mutex> g(impl_->mu);
    impl_->ensure_table(impl_->above, impl_->hi + 1, true);
    if (u > impl_->above[static_cast<size_t>(impl_->hi)])
      throw NumericError("tail quantile target exceeds the window edge mass");
    while (impl_->above.back() > u &&
           static_cast<long long>(impl_->above.size()) < kTableCapMax)
      impl_->ensure_table(impl_->above,
                          static_cast<long long>(impl_->above.size()), true);
    if (impl_->above.back() <= u)
      return quantile_search(impl_->above, impl_->hi + 1, u);
  }
  // far tail: bisect on the analytic form
  long long lo = kTableCapMax - 1, hi = 2 * kTableCapMax;
  while (impl_->analytic_above(hi) > u) {
    lo = hi;
    hi *= 2;
    if (hi > (1ll << 58)) throw NumericError("tail quantile out of range");
  }
  while (lo + 1 < hi) {
    const long long mid = lo + (hi - lo) / 2;
    if (impl_->analytic_above(mid) <= u)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

long long IncrementLaw::quantile_below(double u) const {
  if (!impl_->power_tails)
    throw NumericError("law has no analytic exterior below the window");
  if (!(u > 0.0))
    throw NumericError("tail quantile needs u > 0");
  {
    std::lock_guard<std::mutex> g(impl_->mu);
    impl_->ensure_table(impl_->below, -impl_->lo + 1, false);
    if (u > impl_->below[static_cast<size_t>(-impl_->lo)])
      throw NumericError("tail quantile target exceeds the window edge mass");
    while (impl_->below.back() > u &&
           static_cast<long long>(impl_->below.size()) < kTableCapMax)
      impl_->ensure_table(impl_->below,
                          static_cast<long long>(impl_->below.size()), false);
    if (impl_->below.back() <= u)
      return quantile_search(impl_->below, -impl_->lo + 1, u);
  }
  long long lo = kTableCapMax - 1, hi = 2 * kTableCapMax;
  while (impl_->analytic_below(hi) > u) {
    lo = hi;
    hi *= 2;
    if (hi > (1ll << 58)) throw NumericError("tail quantile out of range");
  }
  while (lo + 1 < hi) {
    const long long mid = lo + (hi - lo) / 2;
    if (impl_->analytic_below(mid) <= u)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

} // namespace exitwalk
