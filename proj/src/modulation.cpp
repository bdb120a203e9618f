#include "gkdv/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <limits>

#include "gkdv/closed_forms.hpp"
#include "gkdv/error.hpp"
#include "gkdv/evolution.hpp"

namespace gkdv {

namespace {

// the three orthogonality directions and their y-derivatives
inline double z_value(int i, double y) {
  switch (i) {
    case 0: return ground::lambda_q(y);
    case 1: return ground::y_lambda_q(y);
    default: return ground::q(y);
  }
}
inline double z_prime(int i, double y) {
  switch (i) {
    case 0: return ground::lambda_q_prime(y);
    case 1: return ground::y_lambda_q_prime(y);
    default: return ground::dq(y);
  }
}

using Mat3 = std::array<std::array<double, 3>, 3>;

double det3(const Mat3& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

// Cramer's rule; the system is 3x3 and well scaled
std::array<double, 3> solve3(const Mat3& a, const std::array<double, 3>& rhs, double det) {
  std::array<double, 3> x{};
  for (int c = 0; c < 3; ++c) {
    Mat3 m = a;
    for (int r = 0; r < 3; ++r) m[r][c] = rhs[r];
    x[c] = det3(m) / det;
  }
  return x;
}

}  // namespace

Modulator::Modulator(std::shared_ptr<const ProfileSet> profiles, const SimGrid& grid, ModulationOptions opts)
    : set_(std::move(profiles)), fns_(set_), grid_(grid), opts_(opts) {
  const auto& pg = set_->grid;
  for (int i = 0; i < 3; ++i) {
    const auto z = pg.sample([i](double y) { return z_value(i, y); });
    z_norm_[i] = l2_norm(pg, z);
    rz_[i] = inner(pg, set_->r_profile, z);
  }
  const double lq = l2_norm(pg, set_->lambda_q);
  det_ref_ = lq * lq * lq * lq * set_->int_q * set_->int_q / 16.0;
}

Modulator::Pairings Modulator::profile_pairings(double b) const {
  const auto& pg = set_->grid;
  Pairings out{};
  const double s = std::pow(std::fabs(b), kGamma);
  for (std::size_t j = 0; j < pg.size(); ++j) {
    const double y = pg.node(j);
    const double p = set_->p_profile[j];
    const double chi = cutoff_chi(s * y);
    const double dchi = s == 0.0 ? 0.0 : s * cutoff_chi(Jet<1>::variable(s * y)).derivative(1);
    const double qb = set_->q[j] + b * chi * p;
    const double dqb = chi * p + kGamma * y * dchi * p;
    for (int i = 0; i < 3; ++i) {
      const double z = z_value(i, y);
      out.qb[i] += qb * z;
      out.dqb[i] += dqb * z;
    }
  }
  for (int i = 0; i < 3; ++i) {
    out.qb[i] *= pg.spacing();
    out.dqb[i] *= pg.spacing();
  }
  return out;
}

std::vector<double> Modulator::ansatz_field(double lambda, double sigma, double b, double r) const {
  require(lambda > 0.0, ErrorCode::OutOfRange, "lambda must be positive");
  const double a = 1.0 / std::sqrt(lambda);
  return grid_.sample([&](double x) {
    const double y = (x - sigma) / lambda;
    return a * (fns_.q_b(b, y) + r * fns_.r(y));
  });
}

ModulationFrame Modulator::decompose(double t, std::span<const double> u, std::span<const double> f,
                                     const ModulationGuess& guess) const {
  const std::size_t n = grid_.size();
  require(u.size() == n && (f.empty() || f.size() == n), ErrorCode::OutOfRange, "snapshot size mismatch");
  std::vector<double> v(u.begin(), u.end());
  const bool has_tail = !f.empty() && sup_norm(f) > 0.0;
  std::optional<TrigInterpolant> f_interp;
  if (has_tail) {
    for (std::size_t j = 0; j < n; ++j) v[j] -= f[j];
    f_interp.emplace(grid_, f);
  }
  const double dx = grid_.spacing();

  double lam = guess.lambda, sig = guess.sigma, b = guess.b;
  require(lam > 0.0, ErrorCode::OutOfRange, "guess lambda must be positive");

  std::array<double, 3> F{};
  Mat3 J{};
  double r = 0.0;
  auto evaluate = [&](bool jacobian) {
    double fs = 0.0, dfs = 0.0;
    if (has_tail) {
      fs = (*f_interp)(sig);
      if (jacobian) dfs = f_interp->derivative(sig);
    }
    const double sl = std::sqrt(lam);
    r = sl * fs;
    std::array<double, 3> iv{}, ivd{}, ivl{};
    const double half = opts_.window * lam;
    // nodes within the pairing window, clipped to the grid
    const double lo = std::max(grid_.x_min(), sig - half), hi = std::min(grid_.x_max(), sig + half);
    const auto j0 = static_cast<std::size_t>(std::max(0.0, std::ceil((lo - grid_.x_min()) / dx)));
    const auto j1 = std::min(n, static_cast<std::size_t>(std::floor((hi - grid_.x_min()) / dx)) + 1);
    for (std::size_t j = j0; j < j1; ++j) {
      const double vj = v[j];
      if (vj == 0.0) continue;
      const double y = (grid_.node(j) - sig) / lam;
      for (int i = 0; i < 3; ++i) {
        iv[i] += vj * z_value(i, y);
        if (jacobian) {
          const double zp = z_prime(i, y);
          ivd[i] += vj * zp;
          ivl[i] += vj * (0.5 * z_value(i, y) + y * zp);
        }
      }
    }
    const auto pp = profile_pairings(b);
    const double c = dx / sl;
    for (int i = 0; i < 3; ++i) {
      F[i] = c * iv[i] - pp.qb[i] - r * rz_[i];
      if (jacobian) {
        const double dr_dsig = sl * dfs, dr_dlam = 0.5 * fs / sl;
        J[i][0] = -c / lam * ivl[i] - dr_dlam * rz_[i];
        J[i][1] = -c / lam * ivd[i] - dr_dsig * rz_[i];
        J[i][2] = -pp.dqb[i];
      }
    }
  };
  auto scaled_residual = [&] {
    double m = 0.0;
    for (int i = 0; i < 3; ++i) m = std::max(m, std::fabs(F[i]) / z_norm_[i]);
    return m;
  };

  ModulationFrame fr;
  fr.t = t;
  int it = 0;
  bool converged = false;
  double last_det = 0.0;
  while (it < opts_.max_iterations) {
    ++it;
    require(std::fabs(b) < opts_.b_star, ErrorCode::NewtonDiverged,
            "Newton iterate left the admissible b range: b = " + std::to_string(b) + " at iteration " + std::to_string(it));
    evaluate(true);
    require(std::isfinite(F[0]) && std::isfinite(F[1]) && std::isfinite(F[2]), ErrorCode::NewtonDiverged,
            "non-finite orthogonality residual");
    const double det = det3(J);
    last_det = std::fabs(det) * lam * lam / det_ref_;
    if (last_det < opts_.det_floor)
      fail(ErrorCode::JacobianSingular, "modulation Jacobian is singular near the current parameters");
    if (scaled_residual() < opts_.newton_tol) {
      converged = true;
      break;
    }
    const auto d = solve3(J, {-F[0], -F[1], -F[2]}, det);
    // damped step: full Newton from a shifted start can land on a spurious root far from the tube
    double step = 1.0;
    const double big = std::max({std::fabs(d[0]) / (0.25 * lam), std::fabs(d[1]) / (0.5 * lam), std::fabs(d[2]) / 0.02});
    if (big > 1.0) step = 1.0 / big;
    lam += step * d[0];
    sig += step * d[1];
    b += step * d[2];
  }
  if (!converged) fail(ErrorCode::NewtonDiverged, "modulation Newton did not converge");

  fr.lambda = lam;
  fr.sigma = sig;
  fr.b = b;
  fr.r = r;
  fr.newton_iters = it;
  fr.jacobian_det = last_det;
  for (int i = 0; i < 3; ++i) fr.ortho_residuals[i] = F[i] / z_norm_[i];

  // residue in x-space, eps((x - sigma)/lambda)
  const double sl = std::sqrt(lam);
  fr.epsilon_x.resize(n);
  double loc = 0.0, l2 = 0.0, nb0 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double y = (grid_.node(j) - sig) / lam;
    const double e = sl * v[j] - fns_.q_b(b, y) - r * fns_.r(y);
    fr.epsilon_x[j] = e;
    loc += e * e * std::exp(-std::fabs(y) / opts_.loc_length);
    l2 += e * e;
    nb0 += e * e * phi_b(y, opts_.B);
  }
  const auto ex = spectral_derivative(grid_, fr.epsilon_x, 1);
  double nb1 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double y = (grid_.node(j) - sig) / lam;
    const double ey = lam * ex[j];
    nb1 += ey * ey * psi_b(y, opts_.B);
  }
  // dy = dx / lambda
  const double dy = dx / lam;
  fr.tube_distance = std::sqrt(loc * dy);
  fr.eps_l2 = std::sqrt(l2 * dy);
  fr.nb_norm = std::sqrt((nb0 + nb1) * dy);
  if (fr.tube_distance > opts_.alpha_star)
    fail(ErrorCode::OutsideTube, "solution is outside the modulation tube: distance " + std::to_string(fr.tube_distance) +
                                     " at lambda " + std::to_string(lam) + ", sigma " + std::to_string(sig) + ", b " + std::to_string(b));

  if (opts_.profile_epsilon) {
    const LocalInterpolant vi(grid_, v);
    const auto& pg = set_->grid;
    fr.epsilon.resize(pg.size());
    for (std::size_t k = 0; k < pg.size(); ++k) {
      const double y = pg.node(k);
      fr.epsilon[k] = sl * vi(lam * y + sig) - fns_.q_b(b, y) - r * set_->r_profile[k];
    }
  }
  const auto cq = conserved_quantities(grid_, u);
  fr.mass = cq.mass;
  fr.energy = cq.energy;
  return fr;
}

std::vector<double> derivative_weights(double z, std::span<const double> x) {
  // Fornberg's recursion, first derivative only
  const std::size_t n = x.size();
  std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min<std::size_t>(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) c[i][k] = c1 * (double(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - double(k) * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][1];
  return w;
}

namespace {

// window of up to k nodes around i, shifted inward at the ends
std::pair<std::size_t, std::size_t> stencil(std::size_t i, std::size_t n, std::size_t k) {
  k = std::min(k, n);
  std::size_t lo = i >= k / 2 ? i - k / 2 : 0;
  if (lo + k > n) lo = n - k;
  return {lo, lo + k};
}

}  // namespace

std::vector<SeriesRecord> assemble_series(std::span<const ModulationFrame> frames, const SeriesOptions& opts) {
  const std::size_t n = frames.size();
  std::vector<SeriesRecord> out(n);
  if (n == 0) return out;
  for (std::size_t i = 1; i < n; ++i)
    require(frames[i].t > frames[i - 1].t, ErrorCode::OutOfRange, "frames must be strictly time ordered");

  std::vector<double> t(n), inv3(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = frames[i].t;
    inv3[i] = std::pow(frames[i].lambda, -3.0);
  }
  // s by integrating the cubic through four neighbors over each interval
  std::vector<double> s(n, opts.s0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto [lo, hi] = stencil(i + 1, n, 4);
    double acc = 0.0;
    {
      // Gauss-Legendre 3-point on [t_i, t_i+1] of the interpolating polynomial
      const double a = t[i], bnd = t[i + 1];
      const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)}, gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      for (int q = 0; q < 3; ++q) {
        const double z = 0.5 * (a + bnd) + 0.5 * (bnd - a) * gx[q];
        double val = 0.0;
        for (std::size_t j = lo; j < hi; ++j) {
          double lj = 1.0;
          for (std::size_t m = lo; m < hi; ++m)
            if (m != j) lj *= (z - t[m]) / (t[j] - t[m]);
          val += lj * inv3[j];
        }
        acc += gw[q] * val;
      }
      acc *= 0.5 * (bnd - a);
    }
    s[i + 1] = s[i] + acc;
    if (s[i + 1] - s[i] > opts.max_gap) fail(ErrorCode::GapTooLarge, "snapshot spacing in s exceeds the gap limit");
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = frames[i];
    auto& rec = out[i];
    rec.t = f.t;
    rec.s = s[i];
    rec.lambda = f.lambda;
    rec.sigma = f.sigma;
    rec.b = f.b;
    rec.r = f.r;
    rec.nb_norm = f.nb_norm;
    rec.mass = f.mass;
    rec.energy = f.energy;
    // g and h only make sense once the soliton is to the right of the origin
    if (f.sigma > 0.0 && f.lambda > 0.0) {
      const auto inv = gh_quantities({s[i], f.lambda, f.sigma, f.b}, opts.params);
      rec.g = inv.g;
      rec.h = inv.h;
    } else {
      rec.g = rec.h = std::numeric_limits<double>::quiet_NaN();
    }
    if (n >= 2) {
      const auto [lo, hi] = stencil(i, n, 5);
      const auto w = derivative_weights(t[i], std::span<const double>(t).subspan(lo, hi - lo));
      double dlnl = 0.0, dsig = 0.0;
      for (std::size_t j = lo; j < hi; ++j) {
        dlnl += w[j - lo] * std::log(frames[j].lambda);
        dsig += w[j - lo] * frames[j].sigma;
      }
      const double l3 = f.lambda * f.lambda * f.lambda;
      rec.m1 = l3 * dlnl + f.b;
      rec.m2 = f.lambda * f.lambda * dsig - 1.0;
      rec.m_norm = std::hypot(rec.m1, rec.m2);
      rec.m_valid = true;
    } else {
      rec.m1 = rec.m2 = rec.m_norm = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

}  // namespace gkdv
