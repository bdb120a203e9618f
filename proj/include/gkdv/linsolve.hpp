#pragma once

// Restarted, right-preconditioned GMRES for matrix-free operators.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gkdv {

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct GmresOptions {
  double rel_tol = 1e-13;
  std::size_t restart = 60;
  std::size_t max_iters = 600;
};

struct GmresResult {
  bool converged = false;
  std::size_t iterations = 0;
  double rel_residual = 0.0;
};

// Solves A x = b starting from the contents of x. M approximates A^{-1}.
GmresResult gmres(const LinearMap& A, const LinearMap& M, std::span<const double> b, std::span<double> x,
                  const GmresOptions& opt = {});

}  // namespace gkdv
