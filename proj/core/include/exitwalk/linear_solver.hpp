#pragma once

#include <string>
#include <vector>

#include "exitwalk/increment_law.hpp"

namespace exitwalk {

enum class SolveMethod { automatic, dense_lu, banded_lu, bicgstab_fft };

struct SolveOptions {
  SolveMethod method = SolveMethod::automatic;
  double tol = 1e-12;           // target max-norm residual
  int max_refinement = 12;      // iterative refinement rounds (direct paths)
  long long max_iterations = 0; // Krylov cap; 0 picks a size-based default
  long long dense_limit = 4096;
  bool transpose = false;       // solve with Q[i][j] = pmf(i - j) instead
  std::size_t memory_limit_mb = 3000;
};

struct SolveReport {
  std::string method;
  long long iterations = 0;
  double residual = 0.0;  // achieved max-norm of b - (I-Q)u
};

/// Solve (I - Q) u = b with Q[i][j] = law.pmf(j - i) on [0, n)^2, the
/// substochastic step kernel of the walk killed outside [0, n). The law's
/// irreducibility plus the boundary mass deficit make I - Q nonsingular.
/// Throws ConvergenceError when the residual target cannot be met.
std::vector<double> solve_absorbing(const IncrementLaw& law, long long n,
                                    const std::vector<double>& b,
                                    const SolveOptions& opt = {},
                                    SolveReport* report = nullptr);

} // namespace exitwalk
