#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gkdv/closed_forms.hpp"
#include "gkdv/diagnostics.hpp"
#include "gkdv/error.hpp"
#include "gkdv/evolution.hpp"
#include "gkdv/profiles.hpp"
#include "gkdv/reduced_ode.hpp"

using namespace gkdv;

namespace {

template <class F>
void expect_code(ErrorCode code, F&& f) {
  try {
    f();
    FAIL() << "no error thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

DecayParams tail_params() { return {.r = 1.0, .eps_exp = 0.001, .beta = 0.5, .nu = 0.25}; }

}  // namespace

TEST(DecayFunctionals, ParameterChecks) {
  auto p = tail_params();
  EXPECT_NO_THROW(check_decay_params(p));
  p.r = 5.0;
  expect_code(ErrorCode::OutOfRange, [&] { check_decay_params(p); });
  p.r = 5.6;  // 2 theta + 4 = 5.5 at beta = 1/2
  expect_code(ErrorCode::OutOfRange, [&] { check_decay_params(p); });
  p = tail_params();
  p.eps_exp = 0.1;  // bound is (1/2)(4)/20 = 0.1
  expect_code(ErrorCode::OutOfRange, [&] { check_decay_params(p); });
}

TEST(DecayFunctionals, ZeroField) {
  SimGrid g(-100, 300, 4096);
  std::vector<double> z(g.size(), 0.0);
  EXPECT_EQ(functional_Mr(g, z, 1600.0, tail_params()), 0.0);
  EXPECT_EQ(functional_Er(g, z, z, 1600.0, tail_params()), 0.0);
  EXPECT_EQ(functional_Er(g, z, {}, 1600.0, tail_params()), 0.0);
}

TEST(DecayFunctionals, NarrowBumpAtCentre) {
  SimGrid g(-100, 300, 16384);
  const double t = 1600.0;
  const auto p = tail_params();
  const double centre = std::sqrt(t);
  auto q = g.sample([&](double x) { return std::exp(-std::pow((x - centre) / 0.1, 2)); });
  double mass = 0.0;
  for (double v : q) mass += v * v;
  mass *= g.spacing();
  const double w0 = OmegaWeight(p.r)(0.0);
  EXPECT_NEAR(functional_Mr(g, q, t, p), w0 * mass, 1e-3 * w0 * mass);
}

TEST(DecayFunctionals, EnergyWithoutBackground) {
  SimGrid g(-100, 300, 16384);
  const double t = 1600.0;
  const auto p = tail_params();
  const double c = 45.0, a = 0.3;
  auto q = g.sample([&](double x) { return a * std::exp(-0.5 * (x - c) * (x - c)); });
  // oracle: analytic derivative, omega_{r+2} evaluated pointwise
  const OmegaWeight w(p.r + 2.0);
  const double width = std::pow(t, p.nu + p.eps_exp);
  double kin = 0.0, pot = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.node(j);
    const double qx = -(x - c) * q[j];
    const double ww = w((x - std::sqrt(t)) / width);
    kin += qx * qx * ww;
    pot += std::pow(q[j], 6) * ww;
  }
  const double expect = std::pow(t, 2 * (p.nu + p.eps_exp)) * (kin - pot / 3.0) * g.spacing();
  EXPECT_NEAR(functional_Er(g, q, {}, t, p), expect, 1e-9 * std::fabs(expect));
}

TEST(EnergyVirial, ZeroResidueAndKappa) {
  auto set = std::make_shared<const ProfileSet>(build_profile_set(ProfileGrid(40.0, 4096)));
  SimGrid g(-60, 60, 2048);
  Modulator mod(set, g);
  const auto u = mod.ansatz_field(1.0, 0.0, -0.01, 0.0);
  const auto fr = mod.decompose(0.0, u, {}, {1.0, 0.0, -0.01});
  const auto wf = w_plus_f(mod, fr, {});
  const auto F = functional_F(g, fr, wf, 100.0, 0.75);
  EXPECT_NEAR(F.value, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(F.kappa, 4.0);
  EXPECT_NEAR(F.scaled, 0.0, 1e-12);
}

TEST(EnergyVirial, CoerciveOnOrthogonalResidue) {
  auto set = std::make_shared<const ProfileSet>(build_profile_set(ProfileGrid(40.0, 4096)));
  SimGrid g(-100, 100, 4096);
  Modulator mod(set, g);
  for (double amp : {0.005, 0.01, 0.02}) {
    auto u = mod.ansatz_field(1.0, 0.0, -0.01, 0.0);
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double x = g.node(j);
      u[j] += amp * std::sin(2.0 * x) * std::exp(-0.05 * (x - 3.0) * (x - 3.0));
    }
    const auto fr = mod.decompose(0.0, u, {}, {1.0, 0.0, -0.01});
    const auto F = functional_F(g, fr, w_plus_f(mod, fr, {}), 100.0, 0.75);
    EXPECT_GT(F.value, 0.1 * fr.nb_norm * fr.nb_norm) << amp;
    EXPECT_NEAR(F.scaled, std::pow(fr.lambda, 4.0) * F.value, 1e-14);
  }
}

TEST(MonotonicityJK, ZeroAndWeight) {
  SimGrid g(-50, 150, 4096);
  std::vector<double> z(g.size(), 0.0);
  const auto jk = functional_JK(g, z, 80.0, 60.0, 2.0);
  EXPECT_EQ(jk.J, 0.0);
  EXPECT_EQ(jk.K, 0.0);
  // xi at x = sigma/2 with tau = t sits exactly on the plateau edge
  const double sigma = 60.0;
  EXPECT_DOUBLE_EQ(cutoff_chi((4.0 * (sigma / 2) - sigma) / sigma - 2.0), 1.0);
  expect_code(ErrorCode::OutOfRange, [&] { functional_JK(g, z, 0.0, 60.0, 1.0); });
}

TEST(MonotonicityJK, NonNegativeJAndFiniteK) {
  SimGrid g(-50, 150, 4096);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    const double c = 20.0 + 8.0 * trial, a = 0.2 * nd(rng);
    auto eta = g.sample([&](double x) { return a * std::exp(-0.1 * (x - c) * (x - c)); });
    const auto jk = functional_JK(g, eta, 80.0, 60.0, 1.5);
    EXPECT_GE(jk.J, 0.0);
    EXPECT_TRUE(std::isfinite(jk.K));
    // nothing counted where xi vanishes: x < (sigma_t + sigma_tau)/4
    if (c + 15.0 < 35.0) EXPECT_LT(jk.J, 1e-12);
  }
}

TEST(PowerLaw, ExactPowerAndRescaling) {
  std::vector<std::pair<double, double>> s;
  for (int i = 0; i <= 40; ++i) {
    const double t = std::pow(10.0, 1.0 + 0.05 * i);
    s.emplace_back(t, 3.0 * std::pow(t, 0.25));
  }
  const auto fit = fit_power_law(s, 0.0, 1e30);
  EXPECT_NEAR(fit.exponent, 0.25, 1e-12);
  EXPECT_NEAR(fit.prefactor, 3.0, 1e-11);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(fit.points, 41u);
  // t -> a t leaves the exponent and rescales the prefactor by a^{-exponent}
  const double a = 7.3;
  auto s2 = s;
  for (auto& pt : s2) pt.first *= a;
  const auto fit2 = fit_power_law(s2, 0.0, 1e30);
  EXPECT_NEAR(fit2.exponent, fit.exponent, 1e-10);
  EXPECT_NEAR(fit2.prefactor, fit.prefactor * std::pow(a, -fit.exponent), 1e-10);
}

TEST(PowerLaw, ClosedFormScaleLaw) {
  std::vector<std::pair<double, double>> s;
  const double beta = 0.5;
  for (int i = 0; i <= 40; ++i) {
    const double sv = std::pow(10.0, 1.0 + 0.04 * i);
    const auto cf = closed_form(sv, theta_from_beta(beta));
    s.emplace_back(time_from_s(sv, beta), cf.lambda);
  }
  const auto fit = fit_power_law(s, 1e3, 1e5);
  EXPECT_NEAR(fit.exponent, 0.25, 1e-6);
  EXPECT_NEAR(fit.prefactor, std::sqrt(2.0), 1e-6);
}

TEST(PowerLaw, NoisyData) {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> nd(0.0, 0.01);
  std::vector<std::pair<double, double>> s;
  for (int i = 0; i < 60; ++i) {
    const double t = 1000.0 * std::pow(100.0, i / 59.0);
    s.emplace_back(t, 2.0 * std::pow(t, -0.4) * (1.0 + nd(rng)));
  }
  const auto fit = fit_power_law(s, 0.0, 1e30);
  EXPECT_NEAR(fit.exponent, -0.4, 0.01);
  EXPECT_GT(fit.r_squared, 0.99);
}

TEST(PowerLaw, Errors) {
  std::vector<std::pair<double, double>> s;
  for (int i = 1; i <= 7; ++i) s.emplace_back(double(i), double(i));
  expect_code(ErrorCode::WindowTooSmall, [&] { fit_power_law(s, 0.0, 100.0); });
  s.emplace_back(8.0, 0.0);
  expect_code(ErrorCode::NonPositiveData, [&] { fit_power_law(s, 0.0, 100.0); });
}

TEST(PowerLaw, DefaultWindowIsFinalDecade) {
  std::vector<std::pair<double, double>> s;
  for (int i = 0; i <= 100; ++i) {
    const double t = std::pow(10.0, 0.03 * i);
    // exponent changes at t = 100; the final decade sees only the late law
    s.emplace_back(t, t < 100.0 ? t : 100.0 * std::pow(t / 100.0, 0.5));
  }
  const auto fit = fit_power_law(s);
  EXPECT_NEAR(fit.exponent, 0.5, 1e-12);
  EXPECT_NEAR(fit.t_hi, 1000.0, 1e-9);
  EXPECT_NEAR(fit.t_lo, 100.0, 1e-9);
}

TEST(RightRegion, Norms) {
  SimGrid g(-50, 150, 4096);
  std::vector<double> z(g.size(), 0.0);
  const auto n0 = residue_right_norm(g, z, 30.0);
  EXPECT_EQ(n0.l2, 0.0);
  EXPECT_EQ(n0.h1, 0.0);
  const double sigma = 30.0;
  auto eta = g.sample([&](double x) { return ground::q(x - 2 * sigma); });
  const auto n1 = residue_right_norm(g, eta, sigma);
  EXPECT_NEAR(n1.l2 * n1.l2, ground::mass, 1e-9);
  // int Q'^2 = int Q^6 / 3 from the energy identity E(Q) = 0
  double q6 = 0.0;
  for (double v : eta) q6 += std::pow(v, 6);
  q6 *= g.spacing();
  EXPECT_NEAR(n1.h1 * n1.h1, ground::mass + q6 / 3.0, 1e-8);
  expect_code(ErrorCode::OutOfRange, [&] { residue_right_norm(g, eta, -1.0); });
}

TEST(Airy, ZeroDataUndefined) {
  SimGrid g(-100, 100, 2048);
  std::vector<double> z(g.size(), 0.0);
  const auto rep = airy_compare(g, z, 5.0, z, 10.0, 10.0);
  EXPECT_EQ(rep.verdict, AiryVerdict::Undefined);
  EXPECT_EQ(rep.nonlinear_right_mass, 0.0);
  EXPECT_EQ(rep.linear_right_mass, 0.0);
}

TEST(Airy, SolitonKeepsRightMass) {
  SimGrid g(-100, 100, 4096);
  auto mid = g.sample([](double x) { return ground::q(x - 10.0); });
  auto fin = g.sample([](double x) { return ground::q(x - 20.0); });
  const auto rep = airy_compare(g, mid, 10.0, fin, 20.0, 20.0);
  EXPECT_NEAR(rep.nonlinear_right_mass, ground::mass, 0.01 * ground::mass);
  EXPECT_LT(rep.linear_right_mass, 0.25 * ground::mass);
  EXPECT_EQ(rep.verdict, AiryVerdict::NonScattering);
}

TEST(Airy, DispersiveDataScatters) {
  SimGrid g(-400, 100, 8192);
  auto u0 = g.sample([](double x) { return 0.1 * std::exp(-x * x / 16.0); });
  // small data: the nonlinear flow is the linear one to high accuracy
  const auto mid = evolve_airy(g, u0, 5.0);
  const auto fin = evolve_airy(g, u0, 40.0);
  const auto rep = airy_compare(g, mid, 5.0, fin, 40.0, 20.0);
  EXPECT_LT(rep.nonlinear_right_mass, 1e-2 * rep.initial_mass);
  EXPECT_NEAR(rep.linear_right_mass, rep.nonlinear_right_mass, 1e-6 * rep.initial_mass);
  EXPECT_EQ(rep.verdict, AiryVerdict::ScatteringLike);
}

TEST(Monotone, Slack) {
  const std::vector<double> dec{10, 9, 9.2, 8, 7};
  auto r = non_increasing_with_slack(dec, 0.05);
  EXPECT_TRUE(r.ok);
  EXPECT_NEAR(r.worst_rise, 0.02, 1e-12);
  r = non_increasing_with_slack(dec, 0.01);
  EXPECT_FALSE(r.ok);
  EXPECT_TRUE(non_increasing_with_slack(std::vector<double>{}, 0.0).ok);
}
