#pragma once

#include "tailbound/cgf.hpp"
#include "tailbound/numeric.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace tailbound {

// The generator cannot be used for the requested bound (not of exponential
// type, or the relevant integral diverges).
class UnsupportedGenerator : public InputError {
 public:
  using InputError::InputError;
};

enum class GeneratorKind { SubGaussian, SubExponential, Bernstein, Bennett, Power, Custom };

// Young function psi of an Orlicz norm. For the exponential-type kinds
// psi(t) = exp(phi(t)) - 1 with phi convex increasing and phi(0) = 0; the
// power kind is psi(t) = t^p and only supports norm evaluation.
class OrliczGenerator {
 public:
  static OrliczGenerator sub_gaussian();
  static OrliczGenerator sub_exponential();
  static OrliczGenerator bernstein(double L);
  static OrliczGenerator bennett(double L);
  static OrliczGenerator power(double p);
  // phi tabulated at increasing abscissae t_j > 0, interpolated linearly with
  // phi(0) = 0 and extrapolated with the last slope.
  static OrliczGenerator custom(std::vector<double> t, std::vector<double> phi);

  GeneratorKind kind() const { return kind_; }
  // L for bernstein/bennett, p for power, unused otherwise.
  double parameter() const { return param_; }
  std::string name() const;

  bool exponential_type() const { return kind_ != GeneratorKind::Power; }

  double phi(double t) const;
  double phi_inverse(double y) const;
  // sup_{t >= 0} lambda t - phi(t); +inf where unbounded.
  double phi_conjugate(double lambda) const;
  // Supremum of lambda for which lambda t - phi(t) -> -inf as t -> inf.
  double conjugate_domain_sup() const;

  double psi(double t) const;
  double psi_inverse(double y) const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& knot_values() const { return knot_values_; }

 private:
  OrliczGenerator(GeneratorKind kind, double param) : kind_(kind), param_(param) {}

  double numeric_conjugate(double lambda) const;

  GeneratorKind kind_;
  double param_ = 0.0;
  std::vector<double> knots_;
  std::vector<double> knot_values_;
};

// piecewise conjugate of the Bernstein exponent (sqrt(1 + 2Lt) - 1)^2 / L^2;
// +inf on [2/L, inf).
double bernstein_phi_star(double lambda, double L);

struct GeneratorCheck {
  bool phi_zero = false;
  bool phi_increasing = false;
  bool phi_convex = false;
  bool inverse_roundtrip = false;
  bool psi_convex_increasing = false;

  bool all() const {
    return phi_zero && phi_increasing && phi_convex && inverse_roundtrip && psi_convex_increasing;
  }
};

// Admissibility checks on a log-spaced grid (midpoint convexity at 1e-9,
// inverse round trip at relative 1e-8).
GeneratorCheck check_generator(const OrliczGenerator& gen);

// ||Y||_psi = inf{u > 0 : E psi(|Y| / u) <= 1} by bisection on u.
double orlicz_norm(const DiscreteDistribution& dist, const TabulatedFunction& f,
                   const OrliczGenerator& gen);

// Same, for a tabulated vector under the given probabilities.
double orlicz_norm(const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                   const Eigen::Ref<const Eigen::VectorXd>& values, const OrliczGenerator& gen);

// log(1 + int_0^inf 2 lambda (e^{lambda t} - 1) e^{-phi(t)} dt), the MGF
// envelope of a unit-norm variable. Requires 0 < lambda < conjugate_domain_sup.
double log_mgf_envelope(const OrliczGenerator& gen, double lambda);

// inf_{lambda > 0} (r + log_mgf_envelope(lambda)) / lambda.
double wr_quadrature_bound(const OrliczGenerator& gen, double r);

// int_0^inf t exp(-phi(t)/2) dt.
double conversion_integral(const OrliczGenerator& gen);

// inf_{lambda > 0} (exp(phi*(lambda)) - 1) / lambda^2.
double conjugate_growth_infimum(const OrliczGenerator& gen);

// Largest M with inf (e^{phi*} - 1)/lambda^2 >= M * int t e^{-phi/2}.
double conversion_factor_M(const OrliczGenerator& gen);

// Closed-form M: 1/4 (sub-Gaussian) and 1/(4L^2 + 3 sqrt(2 pi) L + 4)
// (Bernstein). Empty for the other kinds.
std::optional<double> closed_form_conversion_factor(const OrliczGenerator& gen);

// max{3, 3/sqrt(2M)} * phi^{-1}(2r/3).
double wr_exponential_type(const OrliczGenerator& gen, double M, double r);

}  // namespace tailbound
