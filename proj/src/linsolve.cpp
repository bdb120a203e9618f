#include "gkdv/linsolve.hpp"

#include <algorithm>

namespace gkdv {

namespace {
double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }
}  // namespace

GmresResult gmres(const LinearMap& A, const LinearMap& M, std::span<const double> b, std::span<double> x,
                  const GmresOptions& opt) {
  const std::size_t n = b.size();
  const std::size_t m = opt.restart;
  GmresResult res;
  const double bnorm = norm(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }

  std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
  std::vector<std::vector<double>> Z(m, std::vector<double>(n));
  std::vector<double> H((m + 1) * m), cs(m), sn(m), g(m + 1), w(n), r(n);
  auto h = [&](std::size_t i, std::size_t j) -> double& { return H[i * m + j]; };

  while (res.iterations < opt.max_iters) {
    A(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double beta = norm(r);
    res.rel_residual = beta / bnorm;
    if (res.rel_residual < opt.rel_tol) {
      res.converged = true;
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    std::size_t k = 0;
    for (; k < m && res.iterations < opt.max_iters; ++k) {
      ++res.iterations;
      M(V[k], Z[k]);
      A(Z[k], w);
      // modified Gram-Schmidt, twice for stability
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i <= k; ++i) {
          const double c = dot(w, V[i]);
          if (pass == 0) h(i, k) = c; else h(i, k) += c;
          for (std::size_t j = 0; j < n; ++j) w[j] -= c * V[i][j];
        }
      }
      const double hn = norm(w);
      h(k + 1, k) = hn;
      if (hn > 0.0)
        for (std::size_t j = 0; j < n; ++j) V[k + 1][j] = w[j] / hn;
      for (std::size_t i = 0; i < k; ++i) {
        const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
        h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
        h(i, k) = t;
      }
      const double den = std::hypot(h(k, k), h(k + 1, k));
      cs[k] = h(k, k) / den;
      sn[k] = h(k + 1, k) / den;
      h(k, k) = den;
      h(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      res.rel_residual = std::fabs(g[k + 1]) / bnorm;
      if (res.rel_residual < opt.rel_tol || hn == 0.0) {
        ++k;
        break;
      }
    }
    // back substitution and update
    std::vector<double> y(k);
    for (std::size_t ii = k; ii-- > 0;) {
      double s = g[ii];
      for (std::size_t j = ii + 1; j < k; ++j) s -= h(ii, j) * y[j];
      y[ii] = s / h(ii, ii);
    }
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) x[i] += y[j] * Z[j][i];
  }
  A(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  res.rel_residual = norm(r) / bnorm;
  res.converged = res.rel_residual < opt.rel_tol;
  return res;
}

}  // namespace gkdv
