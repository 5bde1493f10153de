#include "exitwalk/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <mutex>

#include <Eigen/Dense>
#include <fftw3.h>

#include "exitwalk/errors.hpp"
#include "fftw_lock.hpp"

namespace exitwalk {

namespace {

// kernel samples at offsets [-(n-1), n-1]
struct KernelView {
  long long n = 0;
  std::vector<double> k;
  double at(long long d) const { return k[static_cast<size_t>(d + n - 1)]; }
};

KernelView sample_kernel(const IncrementLaw& law, long long n,
                         bool transpose) {
  KernelView kv;
  kv.n = n;
  kv.k.resize(static_cast<size_t>(2 * n - 1));
  for (long long d = -(n - 1); d <= n - 1; ++d)
    kv.k[static_cast<size_t>(d + n - 1)] = law.pmf(transpose ? -d : d);
  return kv;
}

// r = b - (I-Q)u in extended precision; returns max-norm of r
double residual_full(const KernelView& kv, const std::vector<double>& b,
                     const std::vector<double>& u, std::vector<double>& r) {
  const long long n = kv.n;
  double norm = 0.0;
  for (long long i = 0; i < n; ++i) {
    long double acc = static_cast<long double>(b[i]) - u[i];
    const double* krow = kv.k.data() + (n - 1 - i);
    for (long long j = 0; j < n; ++j) acc += krow[j] * u[j];
    r[static_cast<size_t>(i)] = static_cast<double>(acc);
    norm = std::max(norm, std::fabs(r[static_cast<size_t>(i)]));
  }
  return norm;
}

// banded variant: kernel support limited to [lo, hi]
double residual_banded(const KernelView& kv, long long lo, long long hi,
                       const std::vector<double>& b,
                       const std::vector<double>& u, std::vector<double>& r) {
  const long long n = kv.n;
  double norm = 0.0;
  for (long long i = 0; i < n; ++i) {
    long double acc = static_cast<long double>(b[i]) - u[i];
    const long long dlo = std::max(lo, -i), dhi = std::min(hi, n - 1 - i);
    for (long long d = dlo; d <= dhi; ++d)
      acc += kv.at(d) * u[static_cast<size_t>(i + d)];
    r[static_cast<size_t>(i)] = static_cast<double>(acc);
    norm = std::max(norm, std::fabs(r[static_cast<size_t>(i)]));
  }
  return norm;
}

std::vector<double> solve_dense(const KernelView& kv,
                                const std::vector<double>& b,
                                const SolveOptions& opt, SolveReport* rep) {
  const long long n = kv.n;
  const size_t need_mb = static_cast<size_t>(n) * n * 8 / (1 << 20);
  if (need_mb > opt.memory_limit_mb)
    throw ResourceError("dense solve needs about " + std::to_string(need_mb) +
                        " MB, over the " +
                        std::to_string(opt.memory_limit_mb) + " MB budget");

  Eigen::MatrixXd A(n, n);
  for (long long i = 0; i < n; ++i)
    for (long long j = 0; j < n; ++j)
      A(i, j) = (i == j ? 1.0 : 0.0) - kv.at(j - i);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);

  Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
  Eigen::VectorXd x = lu.solve(bv);

  std::vector<double> u(x.data(), x.data() + n), r(static_cast<size_t>(n));
  double res = residual_full(kv, b, u, r);
  int round = 0;
  while (res > opt.tol && round < opt.max_refinement) {
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), n);
    const Eigen::VectorXd d = lu.solve(rv);
    for (long long i = 0; i < n; ++i) u[static_cast<size_t>(i)] += d(i);
    const double next = residual_full(kv, b, u, r);
    if (next >= res) break; // refinement stalled at the precision floor
    res = next;
    ++round;
  }
  if (rep) {
    rep->method = "dense_lu";
    rep->iterations = round;
    rep->residual = res;
  }
  if (res > opt.tol)
    throw ConvergenceError("dense refinement stalled at residual " +
                               std::to_string(res),
                           res);
  return u;
}

std::vector<double> solve_banded(const KernelView& kv, long long lo,
                                 long long hi, const std::vector<double>& b,
                                 const SolveOptions& opt, SolveReport* rep) {
  const long long n = kv.n;
  const long long kl = -lo, ku = hi, w = kl + ku + 1;
  const size_t need_mb = static_cast<size_t>(n) * w * 8 / (1 << 20);
  if (need_mb > opt.memory_limit_mb)
    throw ResourceError("banded solve needs about " + std::to_string(need_mb) +
                        " MB, over budget");

  // row-major band: entry (i, j) at band[i*w + (j - i + kl)]
  std::vector<double> band(static_cast<size_t>(n * w), 0.0);
  auto bandat = [&](long long i, long long j) -> double& {
    return band[static_cast<size_t>(i * w + (j - i + kl))];
  };
  for (long long i = 0; i < n; ++i) {
    const long long jlo = std::max<long long>(0, i - kl);
    const long long jhi = std::min(n - 1, i + ku);
    for (long long j = jlo; j <= jhi; ++j)
      bandat(i, j) = (i == j ? 1.0 : 0.0) - kv.at(j - i);
  }

  // LU without pivoting; the matrix is irreducibly diagonally dominant so
  // elimination cannot blow up and fill stays inside the band
  for (long long k = 0; k < n; ++k) {
    const double piv = bandat(k, k);
    if (!(std::fabs(piv) > 1e-300))
      throw NumericError("banded elimination hit a vanishing pivot");
    const long long ilim = std::min(n - 1, k + kl);
    const long long jlim = std::min(n - 1, k + ku);
    for (long long i = k + 1; i <= ilim; ++i) {
      const double l = bandat(i, k) / piv;
      bandat(i, k) = l;
      if (l == 0.0) continue;
      for (long long j = k + 1; j <= jlim; ++j) bandat(i, j) -= l * bandat(k, j);
    }
  }

  auto lu_solve = [&](const std::vector<double>& rhs) {
    std::vector<double> y(rhs);
    for (long long i = 0; i < n; ++i) {
      const long long jlo = std::max<long long>(0, i - kl);
      double acc = y[static_cast<size_t>(i)];
      for (long long j = jlo; j < i; ++j)
        acc -= bandat(i, j) * y[static_cast<size_t>(j)];
      y[static_cast<size_t>(i)] = acc;
    }
    for (long long i = n - 1; i >= 0; --i) {
      const long long jhi = std::min(n - 1, i + ku);
      double acc = y[static_cast<size_t>(i)];
      for (long long j = i + 1; j <= jhi; ++j)
        acc -= bandat(i, j) * y[static_cast<size_t>(j)];
      y[static_cast<size_t>(i)] = acc / bandat(i, i);
    }
    return y;
  };

  std::vector<double> u = lu_solve(b), r(static_cast<size_t>(n));
  double res = residual_banded(kv, lo, hi, b, u, r);
  int round = 0;
  while (res > opt.tol && round < opt.max_refinement) {
    const std::vector<double> d = lu_solve(r);
    for (long long i = 0; i < n; ++i)
      u[static_cast<size_t>(i)] += d[static_cast<size_t>(i)];
    const double next = residual_banded(kv, lo, hi, b, u, r);
    if (next >= res) break;
    res = next;
    ++round;
  }
  if (rep) {
    rep->method = "banded_lu";
    rep->iterations = round;
    rep->residual = res;
  }
  if (res > opt.tol)
    throw ConvergenceError("banded refinement stalled at residual " +
                               std::to_string(res),
                           res);
  return u;
}

// (I - Q) apply via FFT cross correlation
class FftApply {
public:
  FftApply(const KernelView& kv) : n_(kv.n) {
    L_ = 1;
    while (L_ < 2 * n_) L_ *= 2;
    buf_ = fftw_alloc_real(L_);
    spec_ = fftw_alloc_complex(L_ / 2 + 1);
    kspec_ = fftw_alloc_complex(L_ / 2 + 1);
    {
      std::lock_guard<std::mutex> g(detail::fftw_plan_lock());
      fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(L_), buf_, spec_,
                                  FFTW_ESTIMATE);
      inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(L_), spec_, buf_,
                                  FFTW_ESTIMATE);
    }
    // reversed kernel so that circular convolution computes correlation
    std::memset(buf_, 0, sizeof(double) * static_cast<size_t>(L_));
    for (long long t = 0; t <= 2 * n_ - 2; ++t)
      buf_[t] = kv.at(n_ - 1 - t);
    fftw_execute_dft_r2c(fwd_, buf_, kspec_);
  }
  ~FftApply() {
    std::lock_guard<std::mutex> g(detail::fftw_plan_lock());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(buf_);
    fftw_free(spec_);
    fftw_free(kspec_);
  }
  FftApply(const FftApply&) = delete;
  FftApply& operator=(const FftApply&) = delete;

  // out = (I - Q) u
  void apply(const std::vector<double>& u, std::vector<double>& out) {
    std::memset(buf_, 0, sizeof(double) * static_cast<size_t>(L_));
    std::memcpy(buf_, u.data(), sizeof(double) * static_cast<size_t>(n_));
    fftw_execute_dft_r2c(fwd_, buf_, spec_);
    const double scale = 1.0 / static_cast<double>(L_);
    for (long long t = 0; t < L_ / 2 + 1; ++t) {
      const std::complex<double> a(spec_[t][0], spec_[t][1]);
      const std::complex<double> k(kspec_[t][0], kspec_[t][1]);
      const std::complex<double> prod = a * k * scale;
      spec_[t][0] = prod.real();
      spec_[t][1] = prod.imag();
    }
    fftw_execute_dft_c2r(inv_, spec_, buf_);
    for (long long i = 0; i < n_; ++i)
      out[static_cast<size_t>(i)] = u[static_cast<size_t>(i)] - buf_[i + n_ - 1];
  }

private:
  long long n_, L_;
  double* buf_;
  fftw_complex* spec_;
  fftw_complex* kspec_;
  fftw_plan fwd_, inv_;
};

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

// Strang circulant wrap of the Toeplitz system, inverted in Fourier space.
// The wrapped symbol shares the near-null mode of I - Q, so dividing it out
// clusters the preconditioned spectrum around one.
class CirculantPrecond {
public:
  CirculantPrecond(const KernelView& kv) : n_(kv.n) {
    buf_ = fftw_alloc_complex(static_cast<size_t>(n_));
    spec_ = fftw_alloc_complex(static_cast<size_t>(n_));
    {
      std::lock_guard<std::mutex> g(detail::fftw_plan_lock());
      fwd_ = fftw_plan_dft_1d(static_cast<int>(n_), buf_, spec_,
                              FFTW_FORWARD, FFTW_ESTIMATE);
      inv_ = fftw_plan_dft_1d(static_cast<int>(n_), spec_, buf_,
                              FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    // first column of the wrap: offsets d and d - n share a slot
    for (long long j = 0; j < n_; ++j) {
      const long long d = 2 * j <= n_ ? j : j - n_;
      const double a = (d == 0 ? 1.0 : 0.0) - kv.at(-d);
      buf_[j][0] = a;
      buf_[j][1] = 0.0;
    }
    fftw_execute_dft(fwd_, buf_, spec_);
    lam_.resize(static_cast<size_t>(n_));
    for (long long k = 0; k < n_; ++k) {
      std::complex<double> l(spec_[k][0], spec_[k][1]);
      // a dead mode (exact wrap of a conservative kernel) is left alone
      if (std::abs(l) < 1e-12) l = 1.0;
      lam_[static_cast<size_t>(k)] = l;
    }
  }
  ~CirculantPrecond() {
    std::lock_guard<std::mutex> g(detail::fftw_plan_lock());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(buf_);
    fftw_free(spec_);
  }
  CirculantPrecond(const CirculantPrecond&) = delete;
  CirculantPrecond& operator=(const CirculantPrecond&) = delete;

  void apply_inv(const std::vector<double>& in, std::vector<double>& out) {
    for (long long i = 0; i < n_; ++i) {
      buf_[i][0] = in[static_cast<size_t>(i)];
      buf_[i][1] = 0.0;
    }
    fftw_execute_dft(fwd_, buf_, spec_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (long long k = 0; k < n_; ++k) {
      const std::complex<double> y =
          std::complex<double>(spec_[k][0], spec_[k][1]) /
          lam_[static_cast<size_t>(k)] * scale;
      spec_[k][0] = y.real();
      spec_[k][1] = y.imag();
    }
    fftw_execute_dft(inv_, spec_, buf_);
    for (long long i = 0; i < n_; ++i) out[static_cast<size_t>(i)] = buf_[i][0];
  }

private:
  long long n_;
  fftw_complex* buf_;
  fftw_complex* spec_;
  fftw_plan fwd_, inv_;
  std::vector<std::complex<double>> lam_;
};

std::vector<double> solve_bicgstab(const KernelView& kv,
                                   const std::vector<double>& b,
                                   const SolveOptions& opt, SolveReport* rep) {
  const long long n = kv.n;
  FftApply A(kv);
  CirculantPrecond M(kv);
  const long long max_it =
      opt.max_iterations > 0
          ? opt.max_iterations
          : std::min<long long>(std::max<long long>(4000, 10 * n), 400000);

  std::vector<double> x(static_cast<size_t>(n), 0.0), r(b);
  std::vector<double> rhat(static_cast<size_t>(n)),
      p(static_cast<size_t>(n), 0.0), v(static_cast<size_t>(n), 0.0),
      s(static_cast<size_t>(n)), t(static_cast<size_t>(n)),
      tmp(static_cast<size_t>(n)), phat(static_cast<size_t>(n)),
      shat(static_cast<size_t>(n));
  std::vector<double> best_x = x;
  double best_res = inf_norm(r);

  auto dot = [&](const std::vector<double>& a, const std::vector<double>& c) {
    long double acc = 0.0;
    for (long long i = 0; i < n; ++i)
      acc += static_cast<long double>(a[static_cast<size_t>(i)]) *
             c[static_cast<size_t>(i)];
    return static_cast<double>(acc);
  };

  auto true_residual = [&]() {
    A.apply(x, tmp);
    double res = 0.0;
    for (long long i = 0; i < n; ++i) {
      const auto ii = static_cast<size_t>(i);
      r[ii] = b[ii] - tmp[ii];
      res = std::max(res, std::fabs(r[ii]));
    }
    return res;
  };

  long long it = 0;
  // Lagged-shadow breakdown (rho or rv collapsing) is a property of the
  // shadow vector, not the system: restart from the current iterate with a
  // reshuffled rhat. A sparse rhs (green rows start from a point mass) makes
  // rhat = r0 genuinely fragile, so later rounds densify it.
  for (int round = 0; round < 24 && it < max_it && best_res > opt.tol;
       ++round) {
    if (round == 0) {
      rhat = r;
    } else {
      std::uint64_t h = 0x9e3779b97f4a7c15ull * (round + 1);
      for (long long i = 0; i < n; ++i) {
        h ^= h >> 33;
        h *= 0xff51afd7ed558ccdull;
        const double jitter =
            static_cast<double>(h >> 11) * 0x1.0p-53; // uniform in [0,1)
        rhat[static_cast<size_t>(i)] =
            r[static_cast<size_t>(i)] + (0.5 + jitter) * best_res;
      }
    }
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    bool first = true;
    for (; it < max_it && best_res > opt.tol; ++it) {
      const double rho1 = dot(rhat, r);
      if (!std::isfinite(rho1) ||
          std::fabs(rho1) < 1e-30 * best_res * best_res)
        break;
      if (first) {
        p = r;
        first = false;
      } else {
        const double beta = (rho1 / rho) * (alpha / omega);
        for (long long i = 0; i < n; ++i) {
          const auto ii = static_cast<size_t>(i);
          p[ii] = r[ii] + beta * (p[ii] - omega * v[ii]);
        }
      }
      rho = rho1;
      M.apply_inv(p, phat);
      A.apply(phat, v);
      const double rv = dot(rhat, v);
      if (!std::isfinite(rv) || std::fabs(rv) < 1e-300) break;
      alpha = rho / rv;
      for (long long i = 0; i < n; ++i) {
        const auto ii = static_cast<size_t>(i);
        s[ii] = r[ii] - alpha * v[ii];
      }
      M.apply_inv(s, shat);
      A.apply(shat, t);
      const double tt = dot(t, t);
      omega = tt > 0 ? dot(t, s) / tt : 0.0;
      if (!std::isfinite(alpha) || !std::isfinite(omega)) break;
      for (long long i = 0; i < n; ++i) {
        const auto ii = static_cast<size_t>(i);
        x[ii] += alpha * phat[ii] + omega * shat[ii];
        r[ii] = s[ii] - omega * t[ii];
      }
      if (it % 8 == 7 || inf_norm(r) <= opt.tol) {
        const double res = true_residual();
        if (res < best_res) {
          best_res = res;
          best_x = x;
        }
      }
      if (omega == 0.0) break;
    }
    // resync before the next round; drop back to the best iterate if the
    // aborted round wandered off
    double res = true_residual();
    if (!std::isfinite(res) || res > 2.0 * best_res) {
      x = best_x;
      res = true_residual();
    }
    if (res < best_res) {
      best_res = res;
      best_x = x;
    }
  }

  // final true residual of the best iterate
  A.apply(best_x, tmp);
  double res = 0.0;
  for (long long i = 0; i < n; ++i)
    res = std::max(res, std::fabs(b[static_cast<size_t>(i)] -
                                  tmp[static_cast<size_t>(i)]));
  if (rep) {
    rep->method = "bicgstab_fft";
    rep->iterations = it;
    rep->residual = res;
  }
  if (res > opt.tol)
    throw ConvergenceError("bicgstab stalled at residual " +
                               std::to_string(res) + " after " +
                               std::to_string(it) + " iterations",
                           res);
  return best_x;
}

} // namespace

std::vector<double> solve_absorbing(const IncrementLaw& law, long long n,
                                    const std::vector<double>& b,
                                    const SolveOptions& opt,
                                    SolveReport* report) {
  if (n < 1) throw ConfigError("absorbing solve needs n >= 1");
  if (static_cast<long long>(b.size()) != n)
    throw ConfigError("rhs size does not match system size");

  const KernelView kv = sample_kernel(law, n, opt.transpose);

  SolveMethod m = opt.method;
  if (m == SolveMethod::automatic) {
    const long long band =
        std::max(law.window_hi(), -law.window_lo());
    if (law.is_bounded() && 3 * band < n)
      m = SolveMethod::banded_lu;
    else if (law.is_bounded() || n <= 128)
      m = SolveMethod::dense_lu;
    else
      m = SolveMethod::bicgstab_fft; // circulant preconditioning keeps
                                     // heavy kernels cheap at any size
  }

  switch (m) {
    case SolveMethod::dense_lu:
      return solve_dense(kv, b, opt, report);
    case SolveMethod::banded_lu: {
      if (!law.is_bounded())
        throw ConfigError("banded solve needs a bounded-support law");
      long long lo = opt.transpose ? -law.window_hi() : law.window_lo();
      long long hi = opt.transpose ? -law.window_lo() : law.window_hi();
      return solve_banded(kv, lo, hi, b, opt, report);
    }
    case SolveMethod::bicgstab_fft:
      return solve_bicgstab(kv, b, opt, report);
    default:
      throw ConfigError("unknown solve method");
  }
}

} // namespace exitwalk
