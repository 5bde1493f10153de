#include "exitwalk/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <mutex>
#include <numeric>
#include <utility>

#include <fftw3.h>

#include "exitwalk/convolution.hpp"
#include "exitwalk/errors.hpp"
#include "exitwalk/linear_solver.hpp"
#include "exitwalk/power_tails.hpp"
#include "exitwalk/renewal.hpp"
#include "fftw_lock.hpp"

namespace exitwalk {

namespace {

// Visits of the killed walk started at the boundary state, then one jump out.
// up:   states 0,-1,...,-(depth-1), killed on entering [1,inf) or below;
//       pmf[m] = sum_i g(-i) p(m + i).
// down: mirrored, states 0..depth-1, killed entering (-inf,-1] or above;
//       pmf[m] = sum_i g(i) p(-m - i).
std::vector<double> fp_at_depth(const IncrementLaw& law, bool up,
                                long long depth, long long horizon,
                                double solve_tol) {
  std::vector<double> b(static_cast<std::size_t>(depth), 0.0);
  b[0] = 1.0;
  SolveOptions so;
  so.tol = solve_tol;
  so.transpose = !up; // visit counts solve the transposed system
  std::vector<double> g = solve_absorbing(law, depth, b, so);

  std::function<double(long long)> kfn;
  if (up)
    kfn = [&law](long long t) { return law.pmf(t); };
  else
    kfn = [&law](long long t) { return law.pmf(-t); };
  std::vector<double> out =
      correlate_kernel(g, kfn, 1, static_cast<std::size_t>(horizon));

  std::vector<double> pmf(static_cast<std::size_t>(horizon) + 1, 0.0);
  for (long long m = 1; m <= horizon; ++m)
    pmf[static_cast<std::size_t>(m)] =
        std::max(0.0, out[static_cast<std::size_t>(m - 1)]);
  return pmf;
}

double pmf_defect(const std::vector<double>& pmf) {
  long double s = 0.0L;
  for (double x : pmf) s += x;
  return std::max(0.0, static_cast<double>(1.0L - s));
}

FirstPassageResult fp_run(const IncrementLaw& law, bool up, long long horizon,
                          const FirstPassageOptions& opt) {
  if (horizon < 1) throw ConfigError("first passage horizon must be >= 1");

  FirstPassageResult res;
  res.horizon = horizon;

  if (opt.depth > 0) {
    res.depth = opt.depth;
    res.pmf = fp_at_depth(law, up, opt.depth, horizon, opt.solve_tol);
    res.defect = pmf_defect(res.pmf);
    res.extrapolated = res.pmf;
    res.extrapolated_defect = res.defect;
    return res;
  }

  if (opt.depth0 < 1 || opt.max_depth < opt.depth0)
    throw ConfigError("first passage depth schedule is empty");

  std::vector<std::vector<double>> hist;
  long long depth = opt.depth0;
  for (;;) {
    hist.push_back(fp_at_depth(law, up, depth, horizon, opt.solve_tol));
    if (hist.size() > 3) hist.erase(hist.begin());
    res.depth = depth;
    if (hist.size() >= 2) {
      const std::vector<double>& a = hist[hist.size() - 2];
      const std::vector<double>& c = hist.back();
      double change = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i)
        change = std::max(change, std::abs(c[i] - a[i]));
      if (change < opt.tol / 10.0) break;
    }
    if (depth >= opt.max_depth) break;
    depth = std::min(2 * depth, opt.max_depth);
  }

  res.pmf = hist.back();
  res.defect = pmf_defect(res.pmf);

  // per-entry Aitken step over the last three depths; killed mass can only
  // come back, so the limit sits inside [pmf[m], pmf[m] + defect]
  res.extrapolated = res.pmf;
  if (hist.size() == 3) {
    for (std::size_t i = 0; i < res.pmf.size(); ++i) {
      const double d1 = hist[1][i] - hist[0][i];
      const double d2 = hist[2][i] - hist[1][i];
      if (d2 > 0.0 && d1 > d2) {
        const double r = d2 / d1;
        double ext = hist[2][i] + d2 * r / (1.0 - r);
        ext = std::min(ext, hist[2][i] + res.defect);
        res.extrapolated[i] = ext;
      }
    }
    long double s = 0.0L;
    for (double x : res.extrapolated) s += x;
    if (s > 1.0L) {
      // rescale only the added tails so the total stays a probability
      long double s0 = 0.0L;
      for (double x : res.pmf) s0 += x;
      const double scale =
          s > s0 ? static_cast<double>((1.0L - s0) / (s - s0)) : 0.0;
      for (std::size_t i = 0; i < res.pmf.size(); ++i)
        res.extrapolated[i] =
            res.pmf[i] + scale * (res.extrapolated[i] - res.pmf[i]);
    }
  }
  res.extrapolated_defect = pmf_defect(res.extrapolated);
  return res;
}

} // namespace

FirstPassageResult first_passage_up(const IncrementLaw& law, long long horizon,
                                    const FirstPassageOptions& opt) {
  return fp_run(law, true, horizon, opt);
}

FirstPassageResult first_passage_down(const IncrementLaw& law,
                                      long long horizon,
                                      const FirstPassageOptions& opt) {
  return fp_run(law, false, horizon, opt);
}

namespace {

struct EntranceProbe {
  double strict = 0.0; // P[first entry into the half line is strict]
  double total = 0.0;  // P[walk enters the half line before the kill depth]
};

// side_up: entry into [0, inf) from below, strict means landing > 0.
// side_up = false mirrors everything for downward-drifting walks.
EntranceProbe entrance_at_depth(const IncrementLaw& law, bool side_up,
                                long long depth, double solve_tol,
                                bool want_total) {
  const std::size_t n = static_cast<std::size_t>(depth);
  std::vector<double> b(n), bt;
  for (std::size_t i = 0; i < n; ++i) {
    const long long x = static_cast<long long>(i) + 1;
    b[i] = side_up ? law.tail_above(x) : law.tail_below(x);
  }
  SolveOptions so;
  so.tol = solve_tol;
  so.transpose = side_up;
  std::vector<double> phi = solve_absorbing(law, depth, b, so);

  EntranceProbe out;
  long double acc =
      side_up ? law.tail_above(0) : law.tail_below(0);
  for (std::size_t i = 0; i < n; ++i) {
    const long long x = static_cast<long long>(i) + 1;
    acc += (side_up ? law.pmf(-x) : law.pmf(x)) * phi[i];
  }
  out.strict = static_cast<double>(acc);

  if (want_total) {
    bt.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const long long x = static_cast<long long>(i);
      bt[i] = side_up ? law.tail_above(x) : law.tail_below(x);
    }
    std::vector<double> phit = solve_absorbing(law, depth, bt, so);
    long double acc2 =
        side_up ? law.tail_above(-1) : law.tail_below(-1);
    for (std::size_t i = 0; i < n; ++i) {
      const long long x = static_cast<long long>(i) + 1;
      acc2 += (side_up ? law.pmf(-x) : law.pmf(x)) * phit[i];
    }
    out.total = static_cast<double>(acc2);
  }
  return out;
}

} // namespace

V0Result v0_entrance(const IncrementLaw& law, const V0Options& opt) {
  if (opt.depth0 < 1 || opt.max_depth < opt.depth0)
    throw ConfigError("v0 entrance depth schedule is empty");

  // The strict re-entry identity needs the entrance time to be finite, so
  // probe the half line the walk cannot avoid: downward drift uses the
  // mirrored entrance into (-inf, 0].
  bool side_up = true;
  if (law.mean_above_finite() && !law.mean_below_finite()) {
    side_up = false;
  } else if (law.mean_above_finite() && law.mean_below_finite() &&
             law.mean() < 0.0) {
    side_up = false;
  }

  std::vector<double> seq;
  long long depth = opt.depth0;
  double defect = 1.0;
  for (;;) {
    const bool last_scheduled = depth >= opt.max_depth;
    EntranceProbe probe =
        entrance_at_depth(law, side_up, depth, opt.solve_tol, true);
    seq.push_back(probe.strict);
    defect = std::max(0.0, 1.0 - probe.total);
    if (defect <= opt.target || last_scheduled) break;
    depth = std::min(2 * depth, opt.max_depth);
  }

  double p = seq.back();
  if (seq.size() >= 3) {
    const double d1 = seq[seq.size() - 2] - seq[seq.size() - 3];
    const double d2 = seq.back() - seq[seq.size() - 2];
    if (d2 > 0.0 && d1 > d2) {
      const double r = d2 / d1;
      p = seq.back() + d2 * r / (1.0 - r);
    }
  }
  p = std::min(p, seq.back() + defect);
  p = std::max(p, seq.back());

  if (p <= 0.0)
    throw NumericError("strict entrance probability vanished; v0 is undefined");

  V0Result res;
  res.route = side_up ? "entrance_up" : "entrance_down";
  res.depth = depth;
  res.defect = defect;
  res.lower = 1.0 / (seq.back() + defect);
  res.upper = 1.0 / seq.back();
  res.value = std::clamp(1.0 / p, res.lower, res.upper);
  return res;
}

namespace {

// per-step window convolution q <- q * p on [-W, W] with reused FFT plans
class WindowConvolver {
public:
  WindowConvolver(const IncrementLaw& law, long long W) : W_(W) {
    const std::size_t span = static_cast<std::size_t>(2 * W + 1);
    const std::size_t kspan = static_cast<std::size_t>(4 * W + 1);
    L_ = 1;
    while (L_ < span + kspan - 1) L_ *= 2;
    buf_ = fftw_alloc_real(L_);
    fq_ = fftw_alloc_complex(L_ / 2 + 1);
    fk_ = fftw_alloc_complex(L_ / 2 + 1);
    {
      std::lock_guard<std::mutex> g(detail::fftw_plan_lock());
      fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(L_), buf_, fq_,
                                  FFTW_ESTIMATE);
      inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(L_), fq_, buf_,
                                  FFTW_ESTIMATE);
    }
    std::memset(buf_, 0, sizeof(double) * L_);
    for (long long d = -2 * W; d <= 2 * W; ++d)
      buf_[static_cast<std::size_t>(d + 2 * W)] = law.pmf(d);
    fftw_execute_dft_r2c(fwd_, buf_, fk_);
  }
  ~WindowConvolver() {
    std::lock_guard<std::mutex> g(detail::fftw_plan_lock());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(buf_);
    fftw_free(fq_);
    fftw_free(fk_);
  }
  WindowConvolver(const WindowConvolver&) = delete;
  WindowConvolver& operator=(const WindowConvolver&) = delete;

  void step(std::vector<double>& q) {
    std::memset(buf_, 0, sizeof(double) * L_);
    std::memcpy(buf_, q.data(), sizeof(double) * q.size());
    fftw_execute_dft_r2c(fwd_, buf_, fq_);
    const double scale = 1.0 / static_cast<double>(L_);
    for (std::size_t k = 0; k <= L_ / 2; ++k) {
      const double re = fq_[k][0] * fk_[k][0] - fq_[k][1] * fk_[k][1];
      const double im = fq_[k][0] * fk_[k][1] + fq_[k][1] * fk_[k][0];
      fq_[k][0] = re * scale;
      fq_[k][1] = im * scale;
    }
    fftw_execute_dft_c2r(inv_, fq_, buf_);
    // entry x sits at index (x + W) + 2W of the linear convolution
    for (long long x = -W_; x <= W_; ++x)
      q[static_cast<std::size_t>(x + W_)] =
          std::max(0.0, buf_[static_cast<std::size_t>(x + 3 * W_)]);
  }

private:
  long long W_;
  std::size_t L_;
  double* buf_;
  fftw_complex* fq_;
  fftw_complex* fk_;
  fftw_plan fwd_, inv_;
};

} // namespace

V0SeriesResult v0_series(const IncrementLaw& law, long long kmax,
                         long long window) {
  if (kmax < 1) throw ConfigError("v0 series needs kmax >= 1");

  long long W = window;
  if (W <= 0) {
    if (law.is_bounded()) {
      const long long step =
          std::max(std::llabs(law.window_lo()), std::llabs(law.window_hi()));
      W = std::min<long long>(kmax * std::max<long long>(step, 1), 1 << 17);
    } else {
      W = 8192;
    }
  }

  std::vector<double> q(static_cast<std::size_t>(2 * W + 1), 0.0);
  q[static_cast<std::size_t>(W)] = 1.0;

  // bounded laws walk a short kernel directly; heavy tails go through FFT
  std::vector<std::pair<long long, double>> kern;
  std::unique_ptr<WindowConvolver> conv;
  if (law.is_bounded()) {
    for (long long d = law.window_lo(); d <= law.window_hi(); ++d)
      if (law.pmf(d) != 0.0) kern.emplace_back(d, law.pmf(d));
  } else {
    conv = std::make_unique<WindowConvolver>(law, W);
  }

  V0SeriesResult res;
  res.terms = kmax;
  std::vector<double> ret(static_cast<std::size_t>(kmax) + 1, 0.0);
  long double expo = 0.0L;
  long long period = 0;
  std::vector<double> scratch(q.size());
  for (long long k = 1; k <= kmax; ++k) {
    if (conv) {
      conv->step(q);
    } else {
      std::fill(scratch.begin(), scratch.end(), 0.0);
      for (const auto& [d, pd] : kern) {
        const long long xlo = std::max(-W, -W + d);
        const long long xhi = std::min(W, W + d);
        for (long long x = xlo; x <= xhi; ++x)
          scratch[static_cast<std::size_t>(x + W)] +=
              pd * q[static_cast<std::size_t>(x - d + W)];
      }
      q.swap(scratch);
    }
    const double p0 = q[static_cast<std::size_t>(W)];
    ret[static_cast<std::size_t>(k)] = p0;
    if (p0 > 1e-300) {
      period = period == 0 ? k : std::gcd(period, k);
      res.last_term = p0 / static_cast<double>(k);
      expo += static_cast<long double>(res.last_term);
    }
  }
  if (period == 0)
    throw NumericError("walk never returned to the origin inside the window");
  res.period = period;
  res.raw_value = static_cast<double>(std::exp(expo));

  // local limit closure: P[S_k = 0] ~ c k^(-1/a) along the period, so the
  // exponent tail is c d^(-s) * sum_{j > kmax/d} j^(-s) with s = 1 + 1/a
  double alpha_eff = law.is_bounded() ? 2.0 : std::min(law.stable_index(), 2.0);
  const double s = 1.0 + 1.0 / alpha_eff;
  long long k1 = 0, k2 = 0;
  for (long long k = kmax; k >= 1; --k)
    if (ret[static_cast<std::size_t>(k)] > 1e-300) {
      k1 = k;
      break;
    }
  for (long long k = k1 / 2; k >= 1; --k)
    if (ret[static_cast<std::size_t>(k)] > 1e-300) {
      k2 = k;
      break;
    }
  double tail = 0.0;
  if (k1 > 0 && k2 > 0 && k2 < k1) {
    const double c1 = ret[static_cast<std::size_t>(k1)] *
                      std::pow(static_cast<double>(k1), 1.0 / alpha_eff);
    const double c2 = ret[static_cast<std::size_t>(k2)] *
                      std::pow(static_cast<double>(k2), 1.0 / alpha_eff);
    const double c = (c1 * static_cast<double>(k1) -
                      c2 * static_cast<double>(k2)) /
                     static_cast<double>(k1 - k2);
    if (c > 0.0) {
      PowerLogWeight w{s, 0.0};
      tail = c * std::pow(static_cast<double>(period), -s) *
             power_log_tail_sum(w, k1 / period);
    }
  }
  res.tail_estimate = tail;
  res.value = static_cast<double>(std::exp(expo + static_cast<long double>(tail)));
  return res;
}

LadderLaw wiener_hopf_ladder(const IncrementLaw& law, const LadderOptions& opt) {
  const long long M = opt.horizon;
  if (M < 1) throw ConfigError("ladder horizon must be >= 1");
  if (opt.max_iterations < 2)
    throw ConfigError("ladder factorization needs at least two iterations");

  const double v0 =
      opt.v0_override > 0.0 ? opt.v0_override : v0_entrance(law, opt.v0).value;

  const std::size_t n = static_cast<std::size_t>(M);
  std::function<double(long long)> p_up = [&law](long long t) {
    return law.pmf(t);
  };
  std::function<double(long long)> p_dn = [&law](long long t) {
    return law.pmf(-t);
  };

  std::vector<double> v_d(n + 1, 0.0);
  v_d[0] = v0;
  std::vector<double> z_prev(n + 1, 0.0), z(n + 1, 0.0), zhat(n + 1, 0.0);

  int iter = 0;
  double tv = 1.0;
  for (iter = 1; iter <= opt.max_iterations; ++iter) {
    std::vector<double> zc = correlate_kernel(v_d, p_up, 1, n);
    z[0] = 0.0;
    for (std::size_t m = 1; m <= n; ++m) z[m] = std::max(0.0, zc[m - 1]);

    std::vector<double> u_a = renewal_sequence(z, M);

    std::vector<double> hc = correlate_kernel(u_a, p_dn, 1, n);
    zhat[0] = 0.0;
    for (std::size_t m = 1; m <= n; ++m)
      zhat[m] = std::max(0.0, v0 * hc[m - 1]);

    std::vector<double> u_d = renewal_sequence(zhat, M);
    for (std::size_t y = 0; y <= n; ++y) v_d[y] = v0 * u_d[y];

    long double diff = 0.0L;
    for (std::size_t m = 1; m <= n; ++m) diff += std::abs(z[m] - z_prev[m]);
    tv = 0.5 * static_cast<double>(diff);
    z_prev = z;
    if (tv < opt.tol) break;
  }
  if (tv >= opt.tol)
    throw ConvergenceError("ladder factorization did not settle", tv);

  LadderLaw out;
  out.z_pmf = z;
  out.zhat_pmf = zhat;
  out.v0 = v0;
  out.z_defect = pmf_defect(z);
  out.zhat_defect = pmf_defect(zhat);
  out.horizon = M;
  out.iterations = iter;
  out.final_tv = tv;
  out.law_hash = law.hash();
  return out;
}

} // namespace exitwalk
