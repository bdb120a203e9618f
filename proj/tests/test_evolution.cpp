#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gkdv/closed_forms.hpp"
#include "gkdv/evolution.hpp"

using namespace gkdv;

namespace {

std::vector<double> soliton(const SimGrid& g, double lambda, double center) {
  return g.sample([&](double x) { return ground::q((x - center) / lambda) / std::sqrt(lambda); });
}

double l2_diff(const PeriodicGrid& g, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s * g.spacing());
}

double center_of_mass(const SimGrid& g, std::span<const double> u) {
  double m = 0.0, mx = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    m += u[j] * u[j];
    mx += g.node(j) * u[j] * u[j];
  }
  return mx / m;
}

}  // namespace

TEST(Evolution, ZeroStaysZero) {
  SimGrid g(-50, 50, 1024);
  std::vector<double> u0(g.size(), 0.0);
  GkdvSolver s(g, {}, {}, u0);
  s.advance_to(3.0);
  for (double v : s.field()) EXPECT_EQ(v, 0.0);
}

TEST(Evolution, TravelingSoliton) {
  SimGrid g(-100, 100, 1 << 14);
  auto u0 = soliton(g, 1.0, 0.0);
  GkdvSolver s(g, {}, {}, u0);
  const auto c0 = conserved_quantities(g, u0);
  s.advance_to(5.0);
  const auto exact = soliton(g, 1.0, 5.0);
  const double err = l2_diff(g, s.field(), exact);
  const auto c1 = conserved_quantities(g, s.field());
  EXPECT_LT(err, 1e-5);
  EXPECT_LT(std::fabs(c1.mass - c0.mass) / c0.mass / 5.0, 1e-9);
  const double escale = 0.5 * std::pow(l2_norm(g, spectral_derivative(g, u0, 1)), 2);
  EXPECT_LT(std::fabs(c1.energy - c0.energy) / escale / 5.0, 1e-7);
}

TEST(Evolution, SlowSolitonSpeed) {
  SimGrid g(-100, 100, 1 << 13);
  auto u0 = soliton(g, 2.0, 0.0);
  GkdvSolver s(g, {}, {}, u0);
  std::vector<double> ts, xs;
  for (int i = 0; i <= 16; ++i) {
    const double t = 0.5 * i;
    s.advance_to(t);
    ts.push_back(t);
    xs.push_back(center_of_mass(g, s.field()));
  }
  double tm = 0, xm = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) tm += ts[i], xm += xs[i];
  tm /= ts.size();
  xm /= xs.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) num += (ts[i] - tm) * (xs[i] - xm), den += (ts[i] - tm) * (ts[i] - tm);
  const double slope = num / den;
  EXPECT_GE(slope, 0.249);
  EXPECT_LE(slope, 0.251);
}

TEST(Evolution, ScalingCovariance) {
  const double lam = 2.0;
  SimGrid big(-100, 100, 1 << 13);
  SimGrid small(-50, 50, 1 << 13);
  auto u0 = soliton(big, 1.0, 0.0);
  auto w0 = small.sample([&](double x) { return std::sqrt(lam) * ground::q(lam * x); });
  GkdvSolver a(big, {}, {}, u0);
  GkdvSolver b(small, {}, {}, w0);
  const double t = 0.5;
  a.advance_to(lam * lam * lam * t);
  b.advance_to(t);
  std::vector<double> scaled(small.size());
  for (std::size_t j = 0; j < scaled.size(); ++j) scaled[j] = std::sqrt(lam) * a.field()[j];
  EXPECT_LT(l2_diff(small, scaled, b.field()), 1e-6);
}

TEST(Evolution, FourthOrderSelfConvergence) {
  SimGrid g(-50, 50, 1 << 12);
  auto u0 = soliton(g, 0.8, 0.0);
  auto run = [&](double dt) {
    SolverConfig c;
    c.adaptive = false;
    c.dt_max = dt;
    GkdvSolver s(g, c, {}, u0);
    s.advance_to(1.0);
    return std::vector<double>(s.field().begin(), s.field().end());
  };
  const auto u1 = run(1.0 / 1024), u2 = run(1.0 / 2048), u3 = run(1.0 / 4096);
  const double e1 = l2_diff(g, u1, u2), e2 = l2_diff(g, u2, u3);
  EXPECT_GE(e1 / e2, 12.0) << e1 << " " << e2;
}

TEST(Airy, SingleModePhase) {
  const double L = 100.0;
  SimGrid g(0, L, 256);
  const double k = 2 * std::numbers::pi * 8 / L;
  auto v0 = g.sample([&](double x) { return std::cos(k * x); });
  const double t = 7.3;
  auto v = evolve_airy(g, v0, t);
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(v[j], std::cos(k * g.node(j) + k * k * k * t), 1e-10);
  auto id = evolve_airy(g, v0, 0.0);
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(id[j], v0[j], 1e-15);
}

TEST(Airy, UnitaryAndReversible) {
  SimGrid g(-40, 40, 1024);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  std::vector<double> v0(g.size());
  for (auto& x : v0) x = nd(rng);
  auto v = evolve_airy(g, v0, 3.7);
  EXPECT_NEAR(l2_norm(g, v), l2_norm(g, v0), 1e-12 * l2_norm(g, v0));
  auto back = evolve_airy(g, v, -3.7);
  double err = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) err = std::max(err, std::fabs(back[j] - v0[j]));
  EXPECT_LT(err, 1e-12);
}

TEST(Conserved, GroundState) {
  SimGrid g(-40, 40, 4096);
  auto q = soliton(g, 1.0, 0.0);
  const auto c = conserved_quantities(g, q);
  const auto dq = spectral_derivative(g, q, 1);
  const double kin = inner(g, dq, dq);
  EXPECT_LT(std::fabs(c.energy), 1e-8 * kin);
  EXPECT_NEAR(c.mass, std::sqrt(3.0) * std::numbers::pi / 2, 1e-6);
  std::vector<double> z(g.size(), 0.0);
  const auto c0 = conserved_quantities(g, z);
  EXPECT_EQ(c0.mass, 0.0);
  EXPECT_EQ(c0.energy, 0.0);
}

TEST(Evolution, SpongeDampsOnlyNearEdges) {
  SimGrid g(-100, 100, 2048);
  SpongeSpec sp{.width = 10.0, .strength = 5.0, .left = true, .right = false};
  const auto c = sp.coefficient(g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_GE(c[j], 0.0);
    if (g.node(j) > g.x_min() + 10.0) EXPECT_EQ(c[j], 0.0);
  }
  EXPECT_NEAR(c[0], 5.0, 1e-12);
}
