#include "gkdv/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "gkdv/closed_forms.hpp"
#include "gkdv/error.hpp"
#include "gkdv/evolution.hpp"
#include "gkdv/reduced_ode.hpp"

namespace gkdv {

void check_decay_params(const DecayParams& p) {
  const double theta = theta_from_beta(p.beta);
  require(p.r > 0.0 && p.r < 2.0 * theta + 4.0 && p.r != 5.0, ErrorCode::OutOfRange,
          "r must lie in (0, 2 theta + 4) and differ from 5");
  require(p.eps_exp > 0.0 && p.eps_exp < (3.0 * p.beta - 1.0) * std::fabs(p.r - 5.0) / 20.0, ErrorCode::OutOfRange,
          "eps_exp outside (0, (3 beta - 1)|r - 5|/20)");
}

namespace {

// omega(xbar) at every node, WeightOverflow where the field is nonzero and the weight is not representable
std::vector<double> omega_on_grid(const PeriodicGrid& grid, std::span<const double> field, double r, double t,
                                  const DecayParams& p) {
  const OmegaWeight w(r);
  const double centre = std::pow(t, p.beta);
  const double width = std::pow(t, p.nu + p.eps_exp);
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (field[j] == 0.0) continue;
    out[j] = w((grid.node(j) - centre) / width);
    if (!std::isfinite(out[j]) || out[j] > 1e300) fail(ErrorCode::WeightOverflow, "omega_r overflows on the support");
  }
  return out;
}

}  // namespace

double functional_Mr(const PeriodicGrid& grid, std::span<const double> q, double t, const DecayParams& p) {
  check_decay_params(p);
  require(q.size() == grid.size(), ErrorCode::OutOfRange, "field size mismatch");
  const auto w = omega_on_grid(grid, q, p.r, t, p);
  double sum = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) sum += q[j] * q[j] * w[j];
  return sum * grid.spacing();
}

double functional_Er(const PeriodicGrid& grid, std::span<const double> q, std::span<const double> f0, double t,
                     const DecayParams& p) {
  check_decay_params(p);
  require(q.size() == grid.size() && (f0.empty() || f0.size() == grid.size()), ErrorCode::OutOfRange,
          "field size mismatch");
  const auto qx = spectral_derivative(grid, q, 1);
  // the density vanishes exactly where q and q_x both do
  std::vector<double> support(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) support[j] = std::fabs(q[j]) + std::fabs(qx[j]);
  const auto w = omega_on_grid(grid, support, p.r + 2.0, t, p);
  double sum = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (support[j] == 0.0) continue;
    const double f = f0.empty() ? 0.0 : f0[j];
    const double a = q[j] + f;
    const double f2 = f * f, a2 = a * a;
    const double pot = a2 * a2 * a2 - f2 * f2 * f2 - 6.0 * q[j] * f2 * f2 * f;
    sum += (qx[j] * qx[j] - pot / 3.0) * w[j];
  }
  return std::pow(t, 2.0 * (p.nu + p.eps_exp)) * sum * grid.spacing();
}

std::vector<double> w_plus_f(const Modulator& mod, const ModulationFrame& fr, std::span<const double> f) {
  const auto& g = mod.grid();
  const auto& fn = mod.functions();
  const double sl = std::sqrt(fr.lambda);
  std::vector<double> out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double y = (g.node(j) - fr.sigma) / fr.lambda;
    out[j] = fn.q_b(fr.b, y) + fr.r * fn.r(y) + (f.empty() ? 0.0 : sl * f[j]);
  }
  return out;
}

FunctionalF functional_F(const SimGrid& grid, const ModulationFrame& fr, std::span<const double> wf, double B,
                         double theta) {
  const auto& e = fr.epsilon_x;
  require(e.size() == grid.size() && wf.size() == grid.size(), ErrorCode::OutOfRange,
          "frame and W+F must live on the simulation grid");
  const auto ex = spectral_derivative(grid, e, 1);
  double sum = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    const double y = (grid.node(j) - fr.sigma) / fr.lambda;
    const double ey = fr.lambda * ex[j];
    const double w = wf[j], a = w + e[j];
    const double w2 = w * w, a2 = a * a;
    const double pot = a2 * a2 * a2 - w2 * w2 * w2 - 6.0 * w2 * w2 * w * e[j];
    const double psi = psi_b(y, B);
    sum += ey * ey * psi + e[j] * e[j] * phi_b(y, B) - pot * psi / 3.0;
  }
  FunctionalF out;
  out.value = sum * grid.spacing() / fr.lambda;
  out.kappa = kappa_of_theta(theta);
  out.scaled = std::pow(fr.lambda, out.kappa) * out.value;
  return out;
}

std::vector<double> soliton_part(const SimGrid& grid, double lambda, double sigma) {
  const double a = 1.0 / std::sqrt(lambda);
  return grid.sample([&](double x) { return a * ground::q((x - sigma) / lambda); });
}

JK functional_JK(const SimGrid& grid, std::span<const double> eta, double sigma_t, double sigma_tau,
                 double lambda_tau) {
  require(sigma_t > 0.0 && sigma_tau > 0.0, ErrorCode::OutOfRange, "J and K need positive sigma");
  require(eta.size() == grid.size(), ErrorCode::OutOfRange, "field size mismatch");
  const auto A = soliton_part(grid, lambda_tau, sigma_tau);
  const auto ex = spectral_derivative(grid, eta, 1);
  JK out;
  for (std::size_t j = 0; j < eta.size(); ++j) {
    const double xi = cutoff_chi((4.0 * grid.node(j) - sigma_t) / sigma_tau - 2.0);
    if (xi == 0.0) continue;
    const double n = eta[j], a = A[j], s = a + n;
    const double a2 = a * a, s2 = s * s;
    const double pot = s2 * s2 * s2 - a2 * a2 * a2 - 6.0 * a2 * a2 * a * n;
    out.J += n * n * xi;
    out.K += (ex[j] * ex[j] - pot / 3.0) * xi;
  }
  out.J *= grid.spacing();
  out.K *= grid.spacing();
  return out;
}

PowerFit fit_power_law(std::span<const std::pair<double, double>> series, double t_lo, double t_hi) {
  std::vector<double> lx, ly;
  for (const auto& [t, v] : series) {
    if (t < t_lo || t > t_hi) continue;
    require(t > 0.0 && v > 0.0 && std::isfinite(v), ErrorCode::NonPositiveData,
            "power-law fit needs positive times and values");
    lx.push_back(std::log(t));
    ly.push_back(std::log(v));
  }
  require(lx.size() >= 8, ErrorCode::WindowTooSmall, "power-law fit needs at least 8 points in the window");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double dx = lx[i] - mx, dy = ly[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  require(sxx > 0.0, ErrorCode::WindowTooSmall, "power-law fit needs distinct times");
  PowerFit fit;
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  double res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double d = ly[i] - (my + fit.exponent * (lx[i] - mx));
    res += d * d;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - res / syy, 0.0, 1.0) : 1.0;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.points = lx.size();
  return fit;
}

PowerFit fit_power_law(std::span<const std::pair<double, double>> series) {
  require(!series.empty(), ErrorCode::WindowTooSmall, "empty series");
  double t_max = series.front().first;
  for (const auto& pt : series) t_max = std::max(t_max, pt.first);
  return fit_power_law(series, 0.1 * t_max, t_max);
}

RightNorms residue_right_norm(const SimGrid& grid, std::span<const double> eta, double sigma) {
  require(sigma > 0.0 && sigma < grid.x_max(), ErrorCode::OutOfRange, "sigma must be positive and inside the grid");
  require(eta.size() == grid.size(), ErrorCode::OutOfRange, "field size mismatch");
  const auto ex = spectral_derivative(grid, eta, 1);
  double a = 0.0, b = 0.0;
  for (std::size_t j = 0; j < eta.size(); ++j) {
    if (grid.node(j) <= 0.5 * sigma) continue;
    a += eta[j] * eta[j];
    b += ex[j] * ex[j];
  }
  return {std::sqrt(a * grid.spacing()), std::sqrt((a + b) * grid.spacing())};
}

double right_mass(const SimGrid& grid, std::span<const double> u, double sigma) {
  double a = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j)
    if (grid.node(j) > 0.5 * sigma) a += u[j] * u[j];
  return a * grid.spacing();
}

std::string to_string(AiryVerdict v) {
  switch (v) {
    case AiryVerdict::NonScattering: return "non-scattering";
    case AiryVerdict::ScatteringLike: return "scattering-like";
    case AiryVerdict::Inconclusive: return "inconclusive";
    case AiryVerdict::Undefined: return "undefined";
  }
  return "undefined";
}

AiryReport airy_compare(const SimGrid& grid, std::span<const double> u_mid, double t_mid,
                        std::span<const double> u_final, double t_final, double sigma_final,
                        const AiryOptions& opts) {
  require(u_mid.size() == grid.size() && u_final.size() == grid.size(), ErrorCode::OutOfRange,
          "field size mismatch");
  require(t_final >= t_mid, ErrorCode::OutOfRange, "airy comparison needs t_final >= t_mid");
  require(opts.pad_factor >= 1, ErrorCode::OutOfRange, "pad factor must be at least 1");
  AiryReport rep;
  rep.t_mid = t_mid;
  rep.t_final = t_final;
  rep.sigma_final = sigma_final;
  rep.q_mass = ground::mass;
  rep.nonlinear_right_mass = right_mass(grid, u_final, sigma_final);
  rep.initial_mass = conserved_quantities(grid, u_mid).mass;

  const std::size_t n = grid.size(), pad = opts.pad_factor;
  const SimGrid big(grid.x_max() - double(pad) * grid.length(), grid.x_max(), n * pad);
  std::vector<double> v(n * pad, 0.0);
  std::copy(u_mid.begin(), u_mid.end(), v.begin() + static_cast<std::ptrdiff_t>((pad - 1) * n));
  v = evolve_airy(big, v, t_final - t_mid);
  double lin = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j)
    if (big.node(j) > 0.5 * sigma_final) lin += v[j] * v[j];
  rep.linear_right_mass = lin * big.spacing();

  if (rep.initial_mass == 0.0 || conserved_quantities(grid, u_final).mass == 0.0) {
    rep.verdict = AiryVerdict::Undefined;
  } else if (rep.nonlinear_right_mass < opts.keep_fraction * rep.q_mass) {
    rep.verdict = AiryVerdict::ScatteringLike;
  } else if (rep.linear_right_mass <= opts.lose_fraction * rep.q_mass) {
    rep.verdict = AiryVerdict::NonScattering;
  } else {
    rep.verdict = AiryVerdict::Inconclusive;
  }
  return rep;
}

MonotoneReport non_increasing_with_slack(std::span<const double> values, double rel_slack) {
  MonotoneReport rep;
  if (values.empty()) return rep;
  double scale = std::fabs(values.front());
  if (scale == 0.0)
    for (double v : values) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) return rep;
  double lowest = values.front();
  for (double v : values) {
    rep.worst_rise = std::max(rep.worst_rise, (v - lowest) / scale);
    lowest = std::min(lowest, v);
  }
  rep.ok = rep.worst_rise <= rel_slack;
  return rep;
}

}  // namespace gkdv
