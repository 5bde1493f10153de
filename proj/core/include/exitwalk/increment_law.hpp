#pragma once

#include <cstdint>
#include <memory>

#include "exitwalk/law_spec.hpp"

namespace exitwalk {

struct TwoTails {
  double above = 0.0;  // P[X > x]
  double below = 0.0;  // P[X < -x]
  double both = 0.0;   // sum of the two
};

/// Integer increment distribution: exact pmf on a storage window plus
/// analytic closed-form tails beyond it, so absorbing-mass computations have
/// no truncation error. Copies share immutable state.
class IncrementLaw {
public:
  static IncrementLaw build(const LawSpec& spec);

  /// Exact mass at k, interior or exterior.
  double pmf(long long k) const;

  /// P[X > n] at integer n (any sign) and P[X < -n] for n >= 0.
  double tail_above(long long n) const;
  double tail_below(long long n) const;

  /// Real-argument tails; X is lattice so these are right-continuous steps.
  double right_tail(double x) const;  // P[X > x], x >= 0
  double left_tail(double x) const;   // P[X < -x], x >= 0
  TwoTails tails(double x) const;

  const LawSpec& spec() const;
  Family family() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;

  double stable_index() const;  // lighter of the two tail indices
  double balance_p() const;
  double balance_q() const;
  bool is_bounded() const;  // no mass beyond the window
  bool declared_zero_mean() const;

  long long window_lo() const;
  long long window_hi() const;
  double window_mass() const;

  bool mean_above_finite() const;  // E[X^+] < inf
  bool mean_below_finite() const;
  double mean() const;  // throws CapabilityError when E|X| diverges

  /// Truncated moment functionals of the tails.
  double A(double x) const;          // int_0^x (P[X>t] - P[X<-t]) dt
  double eta_plus(double x) const;   // int_x^inf P[X>t] dt
  double eta_minus(double x) const;  // int_x^inf P[X<-t] dt
  double m_plus(double x) const;     // int_0^x eta_plus
  double m_minus(double x) const;
  double m(double x) const;          // m_plus + m_minus

  /// Exterior quantiles for exact sampling: smallest k > window_hi with
  /// P[X > k] <= u (and the mirrored version). Requires u below the
  /// corresponding window-edge tail mass.
  long long quantile_above(double u) const;
  long long quantile_below(double u) const;

private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

} // namespace exitwalk
