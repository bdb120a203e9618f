#include "gkdv/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "gkdv/closed_forms.hpp"
#include "gkdv/error.hpp"
#include "gkdv/fft.hpp"
#include "gkdv/linsolve.hpp"

namespace gkdv {

namespace {

std::vector<double> q_power4(std::span<const double> q) {
  std::vector<double> v(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double q2 = q[j] * q[j];
    v[j] = q2 * q2;
  }
  return v;
}

// (1 - d^2)^{-1} applied in Fourier space
void helmholtz_inverse(const PeriodicGrid& grid, std::span<const double> in, std::span<double> out) {
  auto& fft = cached_fft(grid.size());
  std::copy(in.begin(), in.end(), fft.real().begin());
  fft.forward();
  auto spec = fft.spectrum();
  for (std::size_t m = 0; m < spec.size(); ++m) {
    const double k = grid.wavenumber(m);
    spec[m] /= (1.0 + k * k);
  }
  fft.inverse();
  std::copy(fft.real().begin(), fft.real().end(), out.begin());
}

// L plus the rank-one lift a(f, Q')Q'/|Q'|^2 that removes the kernel
struct DeflatedOperator {
  const ProfileGrid& grid;
  std::vector<double> q4, dq;
  double dq_norm2;

  explicit DeflatedOperator(const ProfileGrid& g) : grid(g) {
    const auto q = build_ground_state(g);
    q4 = q_power4(q);
    dq = g.sample([](double y) { return ground::dq(y); });
    dq_norm2 = inner(g, dq, dq);
  }

  void apply(std::span<const double> f, std::span<double> out) const {
    const auto d2 = spectral_derivative(grid, f, 2);
    const double c = inner(grid, f, dq) / dq_norm2;
    for (std::size_t j = 0; j < f.size(); ++j) out[j] = -d2[j] + f[j] - 5.0 * q4[j] * f[j] + c * dq[j];
  }

  std::size_t solve(std::span<const double> rhs, std::span<double> x, const char* what) const {
    const LinearMap A = [this](std::span<const double> f, std::span<double> o) { apply(f, o); };
    const LinearMap M = [this](std::span<const double> f, std::span<double> o) { helmholtz_inverse(grid, f, o); };
    GmresOptions opt;
    opt.rel_tol = 1e-12;
    const auto res = gmres(A, M, rhs, x, opt);
    if (!res.converged && res.rel_residual > 1e-10)
      fail(ErrorCode::LinearSolveFailure, std::string(what) + " solve stalled at relative residual " +
                                              std::to_string(res.rel_residual));
    return res.iterations;
  }
};

}  // namespace

std::vector<double> build_ground_state(const ProfileGrid& grid) {
  auto q = grid.sample([](double y) { return ground::q(y); });
  // exact evenness on the node set
  for (std::size_t j = 1; j < grid.size() / 2; ++j) {
    const double s = 0.5 * (q[j] + q[grid.mirror(j)]);
    q[j] = q[grid.mirror(j)] = s;
  }
  return q;
}

std::vector<double> apply_linearized(const ProfileGrid& grid, std::span<const double> field) {
  const auto q = build_ground_state(grid);
  const auto d2 = spectral_derivative(grid, field, 2);
  std::vector<double> out(field.size());
  for (std::size_t j = 0; j < field.size(); ++j) {
    const double q2 = q[j] * q[j];
    out[j] = -d2[j] + field[j] - 5.0 * q2 * q2 * field[j];
  }
  return out;
}

RSolution solve_profile_R(const ProfileGrid& grid) {
  const DeflatedOperator op(grid);
  std::vector<double> rhs(grid.size());
  for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] = 5.0 * op.q4[j];
  RSolution sol;
  sol.r.assign(grid.size(), 0.0);
  sol.iterations = op.solve(rhs, sol.r, "R");
  for (std::size_t j = 1; j < grid.size() / 2; ++j) {
    const std::size_t m = grid.mirror(j);
    const double s = 0.5 * (sol.r[j] + sol.r[m]);
    sol.r[j] = sol.r[m] = s;
  }
  const auto lr = apply_linearized(grid, sol.r);
  for (std::size_t j = 0; j < rhs.size(); ++j) sol.residual = std::max(sol.residual, std::fabs(lr[j] - rhs[j]));
  return sol;
}

double p_step(double y) { return 0.5 * (1.0 - std::tanh(y)); }
double p_step_prime(double y) {
  const double c = std::cosh(y);
  return std::isfinite(c) ? -0.5 / (c * c) : 0.0;
}

PSolution solve_profile_P(const ProfileGrid& grid) {
  const DeflatedOperator op(grid);
  const std::size_t n = grid.size();
  const auto q = build_ground_state(grid);
  const double int_q = integrate(grid, q);
  const auto cum_q = spectral_antiderivative(grid, q);

  PSolution sol;
  sol.p_inf = 0.5 * int_q;
  sol.g.resize(n);
  std::vector<double> rhs(n), step(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double y = grid.node(j);
    // 1/2 int Q + int_{-inf}^y LambdaQ = y Q(y) + 1/2 int_y^inf Q
    sol.g[j] = y * q[j] + 0.5 * (int_q - cum_q[j]);
    const double s = p_step(y);
    const double t = std::tanh(y);
    const double c = std::cosh(y);
    const double sech2 = std::isfinite(c) ? 1.0 / (c * c) : 0.0;
    const double q2 = q[j] * q[j];
    const double ls = -sech2 * t + s - 5.0 * q2 * q2 * s;
    step[j] = s;
    rhs[j] = sol.g[j] - sol.p_inf * ls;
  }
  sol.p_decaying.assign(n, 0.0);
  sol.iterations = op.solve(rhs, sol.p_decaying, "P");

  // fix the kernel component so that (P, Q') = 0
  std::vector<double> p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = sol.p_inf * step[j] + sol.p_decaying[j];
  const double c = inner(grid, p, op.dq) / op.dq_norm2;
  for (std::size_t j = 0; j < n; ++j) {
    sol.p_decaying[j] -= c * op.dq[j];
    p[j] = sol.p_inf * step[j] + sol.p_decaying[j];
  }
  sol.p = std::move(p);

  if (std::fabs(sol.p[n - 1]) > 1e-6 * int_q)
    fail(ErrorCode::BoundaryMismatch, "P does not vanish at the right edge: " + std::to_string(sol.p[n - 1]));

  // residual of (L P)' = Lambda Q, differentiating only decaying pieces
  const auto lpd = apply_linearized(grid, sol.p_decaying);
  std::vector<double> lp_minus_step(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double y = grid.node(j);
    const double t = std::tanh(y);
    const double cy = std::cosh(y);
    const double sech2 = std::isfinite(cy) ? 1.0 / (cy * cy) : 0.0;
    const double q2 = q[j] * q[j];
    const double ls = -sech2 * t + step[j] - 5.0 * q2 * q2 * step[j];
    lp_minus_step[j] = lpd[j] + sol.p_inf * (ls - step[j]);
  }
  const auto dlp = spectral_derivative(grid, lp_minus_step, 1);
  for (std::size_t j = 0; j < n; ++j) {
    const double y = grid.node(j);
    const double r = dlp[j] + sol.p_inf * p_step_prime(y) - ground::lambda_q(y);
    sol.residual = std::max(sol.residual, std::fabs(r));
  }
  return sol;
}

double build_cutoff_chi(double x) { return cutoff_chi(x); }

ProfileSet build_profile_set(const ProfileGrid& grid) {
  ProfileSet s{grid, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};
  const std::size_t n = grid.size();
  s.q = build_ground_state(grid);
  s.q_prime = grid.sample([](double y) { return ground::dq(y); });
  s.lambda_q = grid.sample([](double y) { return ground::lambda_q(y); });
  s.q_cubed = grid.sample([](double y) { return ground::q_cubed(y); });
  s.int_q = integrate(grid, s.q);
  s.int_q_sq = inner(grid, s.q, s.q);

  const auto d2q = spectral_derivative(grid, s.q, 2);
  for (std::size_t j = 0; j < n; ++j) {
    const double q2 = s.q[j] * s.q[j];
    s.eq_residual = std::max(s.eq_residual, std::fabs(-d2q[j] + s.q[j] - q2 * q2 * s.q[j]));
  }

  auto rs = solve_profile_R(grid);
  s.r_profile = std::move(rs.r);
  s.r_residual = rs.residual;
  s.r_iterations = rs.iterations;
  s.r_prime = spectral_derivative(grid, s.r_profile, 1);

  auto ps = solve_profile_P(grid);
  s.p_profile = std::move(ps.p);
  s.p_decaying = std::move(ps.p_decaying);
  s.g_field = std::move(ps.g);
  s.p_inf = ps.p_inf;
  s.p_residual = ps.residual;
  s.p_iterations = ps.iterations;
  const auto dpd = spectral_derivative(grid, s.p_decaying, 1);
  s.p_prime.resize(n);
  s.p_second.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double y = grid.node(j);
    s.p_prime[j] = dpd[j] + s.p_inf * p_step_prime(y);
    const double q2 = s.q[j] * s.q[j];
    // from L P = G
    s.p_second[j] = s.p_profile[j] - 5.0 * q2 * q2 * s.p_profile[j] - s.g_field[j];
  }

  s.pq_pairing = inner(grid, s.p_profile, s.q);
  s.rq_pairing = inner(grid, s.r_profile, s.q);
  return s;
}

LocalizedProfile build_localized_profile(double b, const ProfileSet& set, double b_star) {
  require(std::fabs(b) < b_star, ErrorCode::OutOfRange,
          "|b| = " + std::to_string(std::fabs(b)) + " exceeds the admissible bound " + std::to_string(b_star));
  const auto& grid = set.grid;
  const std::size_t n = grid.size();
  const double ab = std::fabs(b);
  const double scale = std::pow(ab, kGamma);
  if (ab > 0.0 && 2.0 / scale > grid.half_width())
    fail(ErrorCode::DomainTooSmall, "cutoff support 2|b|^{-3/4} = " + std::to_string(2.0 / scale) +
                                        " exceeds half_width " + std::to_string(grid.half_width()));

  LocalizedProfile out;
  out.b_value = b;
  out.q_b.resize(n);
  out.p_b.resize(n);
  out.dqb_db.resize(n);
  out.psi_b.assign(n, 0.0);
  std::vector<double> e(n), lam(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double y = grid.node(j);
    const auto c = cutoff_chi(Jet<2>::variable(scale * y));
    const double chi = c.derivative(0);
    const double dchi = scale * c.derivative(1);
    const double d2chi = scale * scale * c.derivative(2);
    const double p = set.p_profile[j], dp = set.p_prime[j], d2p = set.p_second[j];
    const double pb = chi * p;
    const double dpb = dchi * p + chi * dp;
    const double d2pb = d2chi * p + 2.0 * dchi * dp + chi * d2p;
    const double q = set.q[j];
    const double qb = q + b * pb;
    out.p_b[j] = pb;
    out.q_b[j] = qb;
    out.dqb_db[j] = pb + kGamma * y * dchi * p;
    const double qb2 = qb * qb, q2 = q * q;
    e[j] = b * (d2pb - pb) + (qb2 * qb2 * qb - q2 * q2 * q);
    const double dqb = set.q_prime[j] + b * dpb;
    lam[j] = 0.5 * qb + y * dqb;
  }
  const auto de = spectral_derivative(grid, e, 1);
  for (std::size_t j = 0; j < n; ++j)
    out.psi_b[j] = -(de[j] + b * lam[j] - 2.0 * b * b * out.dqb_db[j]);
  return out;
}

// -------- pointwise evaluation --------

LocalInterpolant::LocalInterpolant(const PeriodicGrid& grid, std::vector<double> samples, int order)
    : x_min_(grid.x_min()), h_(grid.spacing()), v_(std::move(samples)), order_(order) {
  // barycentric weights for equispaced nodes
  w_.resize(static_cast<std::size_t>(order));
  double binom = 1.0;
  for (int j = 0; j < order; ++j) {
    w_[static_cast<std::size_t>(j)] = (j % 2 == 0 ? 1.0 : -1.0) * binom;
    binom = binom * static_cast<double>(order - 1 - j) / static_cast<double>(j + 1);
  }
}

double LocalInterpolant::operator()(double y) const {
  const double pos = (y - x_min_) / h_;
  const long n = static_cast<long>(v_.size());
  if (pos < 0.0 || pos > static_cast<double>(n - 1)) return 0.0;
  const long half = order_ / 2;
  long start = static_cast<long>(std::floor(pos)) - half + 1;
  start = std::clamp(start, 0L, n - order_);
  double num = 0.0, den = 0.0;
  for (int j = 0; j < order_; ++j) {
    const double d = pos - static_cast<double>(start + j);
    const double vj = v_[static_cast<std::size_t>(start + j)];
    if (d == 0.0) return vj;
    const double t = w_[static_cast<std::size_t>(j)] / d;
    num += t * vj;
    den += t;
  }
  return num / den;
}

ProfileFunctions::ProfileFunctions(std::shared_ptr<const ProfileSet> set)
    : set_(std::move(set)),
      r_(set_->grid, set_->r_profile),
      dr_(set_->grid, set_->r_prime),
      pd_(set_->grid, set_->p_decaying),
      dpd_(set_->grid, spectral_derivative(set_->grid, set_->p_decaying, 1)) {}

double ProfileFunctions::p(double y) const { return set_->p_inf * p_step(y) + pd_(y); }
double ProfileFunctions::dp(double y) const { return set_->p_inf * p_step_prime(y) + dpd_(y); }

double ProfileFunctions::chi_b(double b, double y) const {
  return cutoff_chi(std::pow(std::fabs(b), kGamma) * y);
}

double ProfileFunctions::dchi_b(double b, double y) const {
  const double s = std::pow(std::fabs(b), kGamma);
  if (s == 0.0) return 0.0;
  return s * cutoff_chi(Jet<1>::variable(s * y)).derivative(1);
}

double ProfileFunctions::q_b(double b, double y) const { return ground::q(y) + b * chi_b(b, y) * p(y); }

double ProfileFunctions::dq_b(double b, double y) const {
  return ground::dq(y) + b * (dchi_b(b, y) * p(y) + chi_b(b, y) * dp(y));
}

double ProfileFunctions::dqb_db(double b, double y) const {
  return chi_b(b, y) * p(y) + kGamma * y * dchi_b(b, y) * p(y);
}

}  // namespace gkdv
