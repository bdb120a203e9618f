#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gkdv {

// Uniform periodic grid: nodes x_min + j*spacing, j = 0..n-1.
class PeriodicGrid {
 public:
  PeriodicGrid(double x_min, double length, std::size_t n_points);

  double x_min() const { return x_min_; }
  double x_max() const { return x_min_ + length_; }
  double length() const { return length_; }
  std::size_t size() const { return n_; }
  double spacing() const { return length_ / static_cast<double>(n_); }
  double node(std::size_t j) const { return x_min_ + static_cast<double>(j) * spacing(); }
  std::vector<double> nodes() const;

  // wavenumber of r2c mode m (0 <= m <= n/2)
  double wavenumber(std::size_t m) const;
  std::vector<double> wavenumbers() const;
  double nyquist() const { return wavenumber(n_ / 2); }

  // sample a function on the nodes
  template <class F>
  std::vector<double> sample(F&& f) const {
    std::vector<double> v(n_);
    for (std::size_t j = 0; j < n_; ++j) v[j] = f(node(j));
    return v;
  }

 private:
  double x_min_;
  double length_;
  std::size_t n_;
};

// Centered grid [-H, H) for profiles on the rescaled variable y.
class ProfileGrid : public PeriodicGrid {
 public:
  ProfileGrid(double half_width, std::size_t n_points);
  double half_width() const { return 0.5 * length(); }
  // node index of -y_j
  std::size_t mirror(std::size_t j) const { return (size() - j) % size(); }
};

// Simulation grid on [x_min, x_max).
class SimGrid : public PeriodicGrid {
 public:
  SimGrid(double x_min, double x_max, std::size_t n_points);
};

bool is_power_of_two(std::size_t n);

// Spectral differentiation of the trigonometric interpolant (order 0..3).
std::vector<double> spectral_derivative(const PeriodicGrid& grid, std::span<const double> field, int order,
                                        bool dealias = false);

// Spectral antiderivative with F(x_min) = 0; exact for the mean mode too.
std::vector<double> spectral_antiderivative(const PeriodicGrid& grid, std::span<const double> field);

// Rectangle rule, spectrally accurate on the periodic grid.
double integrate(const PeriodicGrid& grid, std::span<const double> field);
double inner(const PeriodicGrid& grid, std::span<const double> f, std::span<const double> g);
double l2_norm(const PeriodicGrid& grid, std::span<const double> f);
double l2_norm_spectral(const PeriodicGrid& grid, std::span<const double> f);
double sup_norm(std::span<const double> f);

// Evaluates the trigonometric interpolant (and optionally its first derivative).
class TrigInterpolant {
 public:
  TrigInterpolant(const PeriodicGrid& grid, std::span<const double> field);
  double operator()(double x) const;
  double derivative(double x) const;
  std::vector<double> operator()(std::span<const double> xs) const;

 private:
  std::complex<double> series(double x, bool differentiate) const;
  double x_min_;
  double length_;
  std::size_t n_;
  std::vector<std::complex<double>> coef_;
};

// -------- weights --------

enum class WeightFamily { OmegaR, PsiB, PhiB, Loc };

WeightFamily parse_weight_family(const std::string& name);
std::string to_string(WeightFamily f);

// The omega_r family: e^{x/8} for x <= 0, x^r for x >= 2, monotone in between.
// Built in log space from a strictly positive log-derivative.
class OmegaWeight {
 public:
  explicit OmegaWeight(double r);
  double r() const { return r_; }
  double operator()(double x) const;
  // value and first three derivatives
  struct Derivs {
    double w, w1, w2, w3;
  };
  Derivs derivs(double x) const;

 private:
  double log_weight(double x) const;
  // log-derivative and two of its derivatives
  void log_slope(double x, double& l1, double& l2, double& l3) const;

  double r_;
  double delta_;
  double bump_amp_;
  double bump_norm_;
  std::vector<double> table_l_;
  std::vector<double> table_dl_;
  double table_h_;
};

struct WeightSpec {
  WeightFamily family = WeightFamily::PhiB;
  double parameter = 100.0;  // r for omega_r, B for psi_B / phi_B, length for loc
  double shift = 0.0;
  double scale = 1.0;
};

// A weight evaluator that caches the omega_r table.
class Weight {
 public:
  explicit Weight(WeightSpec spec);
  double operator()(double x) const;
  const WeightSpec& spec() const { return spec_; }

 private:
  WeightSpec spec_;
  std::vector<OmegaWeight> omega_;
};

double psi_b(double y, double B);
double phi_b(double y, double B);

// (sum f^2 w dx)^{1/2}; Overflow if w > 1e300 where f != 0
double weighted_norm(const PeriodicGrid& grid, std::span<const double> field, const WeightSpec& w);

}  // namespace gkdv
