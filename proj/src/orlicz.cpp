#include "tailbound/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tailbound {

namespace {

// (1 + x) log(1 + x) - x, with a series near zero to avoid cancellation.
double bennett_h(double x) {
  if (std::abs(x) < 1e-3) {
    const double x2 = x * x;
    return x2 * (0.5 - x / 6.0 + x2 / 12.0 - x2 * x / 20.0 + x2 * x2 / 30.0);
  }
  return (1.0 + x) * std::log1p(x) - x;
}

double log_add_exp_zero(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// First doubling point past the maximum of a concave-like exponent `g` where
// g has dropped `depth` below `peak` and is still decreasing.
double truncation_point(const std::function<double(double)>& g, double peak, double depth) {
  double t = 1.0;
  for (int it = 0; it < 2100; ++it) {
    const double gt = g(t);
    if (gt < peak - depth && g(t * (1.0 + 1e-6)) < gt) return t;
    t *= 2.0;
  }
  throw NumericError("could not locate a quadrature truncation point");
}

Minimum maximize_on(const std::function<double(double)>& g, double lo, double hi) {
  Minimum m = golden_section([&g](double t) { return -g(t); }, lo, hi, 1e-12);
  m.value = -m.value;
  return m;
}

}  // namespace

OrliczGenerator OrliczGenerator::sub_gaussian() { return {GeneratorKind::SubGaussian, 0.0}; }

OrliczGenerator OrliczGenerator::sub_exponential() { return {GeneratorKind::SubExponential, 0.0}; }

OrliczGenerator OrliczGenerator::bernstein(double L) {
  if (!(L > 0.0) || !std::isfinite(L)) throw InputError("Bernstein parameter L must be positive");
  return {GeneratorKind::Bernstein, L};
}

OrliczGenerator OrliczGenerator::bennett(double L) {
  if (!(L > 0.0) || !std::isfinite(L)) throw InputError("Bennett parameter L must be positive");
  return {GeneratorKind::Bennett, L};
}

OrliczGenerator OrliczGenerator::power(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InputError("power generator needs p >= 1");
  return {GeneratorKind::Power, p};
}

OrliczGenerator OrliczGenerator::custom(std::vector<double> t, std::vector<double> phi) {
  if (t.empty() || t.size() != phi.size()) {
    throw InputError("custom generator needs matching nonempty t and phi tables");
  }
  OrliczGenerator gen{GeneratorKind::Custom, 0.0};
  gen.knots_.push_back(0.0);
  gen.knot_values_.push_back(0.0);
  double last_slope = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double dt = t[i] - gen.knots_.back();
    if (!(dt > 0.0) || !std::isfinite(t[i])) {
      throw InputError("custom generator abscissae must be positive and strictly increasing");
    }
    const double slope = (phi[i] - gen.knot_values_.back()) / dt;
    if (!(slope > 0.0) || !std::isfinite(phi[i])) {
      throw InputError("custom generator phi must be strictly increasing with phi(0) = 0");
    }
    if (slope < last_slope * (1.0 - 1e-12)) throw InputError("custom generator phi must be convex");
    last_slope = slope;
    gen.knots_.push_back(t[i]);
    gen.knot_values_.push_back(phi[i]);
  }
  return gen;
}

std::string OrliczGenerator::name() const {
  switch (kind_) {
    case GeneratorKind::SubGaussian: return "sub-gaussian";
    case GeneratorKind::SubExponential: return "sub-exponential";
    case GeneratorKind::Bernstein: return "bernstein";
    case GeneratorKind::Bennett: return "bennett";
    case GeneratorKind::Power: return "power";
    case GeneratorKind::Custom: return "custom";
  }
  return "unknown";
}

double OrliczGenerator::phi(double t) const {
  if (t <= 0.0) return 0.0;
  switch (kind_) {
    case GeneratorKind::SubGaussian: return t * t;
    case GeneratorKind::SubExponential: return t;
    case GeneratorKind::Bernstein: {
      // (sqrt(1 + 2Lt) - 1) / L rewritten without cancellation.
      const double s = 2.0 * t / (std::sqrt(1.0 + 2.0 * param_ * t) + 1.0);
      return s * s;
    }
    case GeneratorKind::Bennett: return 2.0 * bennett_h(param_ * t) / (param_ * param_);
    case GeneratorKind::Power: return std::log1p(std::pow(t, param_));
    case GeneratorKind::Custom: {
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
      const std::size_t j = std::min<std::size_t>(it - knots_.begin(), knots_.size() - 1);
      const double slope = (knot_values_[j] - knot_values_[j - 1]) / (knots_[j] - knots_[j - 1]);
      return knot_values_[j - 1] + slope * (t - knots_[j - 1]);
    }
  }
  return 0.0;
}

double OrliczGenerator::phi_inverse(double y) const {
  if (y <= 0.0) return 0.0;
  switch (kind_) {
    case GeneratorKind::SubGaussian: return std::sqrt(y);
    case GeneratorKind::SubExponential: return y;
    case GeneratorKind::Bernstein: return std::sqrt(y) + 0.5 * param_ * y;
    case GeneratorKind::Power: return std::pow(std::expm1(y), 1.0 / param_);
    case GeneratorKind::Custom: {
      const auto it = std::upper_bound(knot_values_.begin(), knot_values_.end(), y);
      const std::size_t j =
          std::min<std::size_t>(it - knot_values_.begin(), knot_values_.size() - 1);
      const double slope = (knot_values_[j] - knot_values_[j - 1]) / (knots_[j] - knots_[j - 1]);
      return knots_[j - 1] + (y - knot_values_[j - 1]) / slope;
    }
    case GeneratorKind::Bennett: {
      double lo = 0.0, hi = std::max(1.0, std::sqrt(y));
      while (phi(hi) < y) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NumericError("Bennett inverse bracketing failed");
      }
      for (int it = 0; it < 400 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < y ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return 0.0;
}

double OrliczGenerator::conjugate_domain_sup() const {
  switch (kind_) {
    case GeneratorKind::SubGaussian: return kInf;
    case GeneratorKind::SubExponential: return 1.0;
    case GeneratorKind::Bernstein: return 2.0 / param_;
    case GeneratorKind::Bennett: return kInf;
    case GeneratorKind::Power: return 0.0;
    case GeneratorKind::Custom: {
      const std::size_t j = knots_.size() - 1;
      return (knot_values_[j] - knot_values_[j - 1]) / (knots_[j] - knots_[j - 1]);
    }
  }
  return 0.0;
}

double bernstein_phi_star(double lambda, double L) {
  if (!(L > 0.0)) throw InputError("Bernstein parameter L must be positive");
  if (lambda < 0.0) return 0.0;
  if (lambda >= 2.0 / L) return kInf;
  return lambda * lambda / (4.0 * (1.0 - 0.5 * L * lambda));
}

double OrliczGenerator::phi_conjugate(double lambda) const {
  if (lambda <= 0.0) return 0.0;
  switch (kind_) {
    case GeneratorKind::SubGaussian: return 0.25 * lambda * lambda;
    case GeneratorKind::SubExponential: return lambda <= 1.0 ? 0.0 : kInf;
    case GeneratorKind::Bernstein: return bernstein_phi_star(lambda, param_);
    case GeneratorKind::Bennett: {
      // Stationary point of lambda t - phi(t): log(1 + Lt) = lambda L / 2.
      const double t = std::expm1(0.5 * lambda * param_) / param_;
      return std::isfinite(t) ? lambda * t - phi(t) : kInf;
    }
    case GeneratorKind::Power:
    case GeneratorKind::Custom: return numeric_conjugate(lambda);
  }
  return kInf;
}

double OrliczGenerator::numeric_conjugate(double lambda) const {
  if (lambda <= 0.0) return 0.0;
  const double sup = conjugate_domain_sup();
  if (lambda > sup) return kInf;
  auto g = [this, lambda](double t) { return lambda * t - phi(t); };
  double t_star = 1.0;
  while (g(t_star) >= 0.0 && t_star < 1e300) {
    if (kind_ == GeneratorKind::Custom && t_star > knots_.back()) break;
    t_star *= 2.0;
  }
  double best = maximize_on(g, 0.0, t_star).value;
  for (double knot : knots_) {
    if (knot <= t_star) best = std::max(best, g(knot));
  }
  return std::max(best, 0.0);
}

double OrliczGenerator::psi(double t) const {
  if (t <= 0.0) return 0.0;
  if (kind_ == GeneratorKind::Power) return std::pow(t, param_);
  return std::expm1(phi(t));
}

double OrliczGenerator::psi_inverse(double y) const {
  if (y <= 0.0) return 0.0;
  if (kind_ == GeneratorKind::Power) return std::pow(y, 1.0 / param_);
  return phi_inverse(std::log1p(y));
}

GeneratorCheck check_generator(const OrliczGenerator& gen) {
  GeneratorCheck out;
  constexpr int kGrid = 61;
  std::vector<double> grid(kGrid);
  for (int i = 0; i < kGrid; ++i) grid[i] = std::pow(10.0, -3.0 + 5.0 * i / (kGrid - 1));

  auto midpoint_convex = [&](auto&& fn, double limit) {
    for (int i = 0; i < kGrid; ++i) {
      for (int step : {1, 5, 20}) {
        if (i + step >= kGrid) continue;
        const double a = grid[i], b = grid[i + step];
        const double fa = fn(a), fb = fn(b);
        if (fb > limit) continue;
        const double chord = 0.5 * (fa + fb);
        if (fn(0.5 * (a + b)) > chord + 1e-9 * (1.0 + std::abs(chord))) return false;
      }
    }
    return true;
  };
  auto increasing = [&](auto&& fn, double limit) {
    for (int i = 0; i + 1 < kGrid; ++i) {
      if (fn(grid[i + 1]) > limit) break;
      if (!(fn(grid[i + 1]) > fn(grid[i]))) return false;
    }
    return true;
  };

  auto phi = [&gen](double t) { return gen.phi(t); };
  auto psi = [&gen](double t) { return gen.psi(t); };
  out.phi_zero = gen.phi(0.0) == 0.0;
  out.phi_increasing = increasing(phi, kInf);
  // log(1 + t^p) is not convex; the exponent checks only bind for exponential type.
  out.phi_convex = !gen.exponential_type() || midpoint_convex(phi, kInf);
  out.inverse_roundtrip = true;
  for (double t : grid) {
    const double back = gen.phi_inverse(gen.phi(t));
    if (std::abs(back - t) > 1e-8 * t) out.inverse_roundtrip = false;
  }
  out.psi_convex_increasing =
      gen.psi(0.0) == 0.0 && increasing(psi, 1e300) && midpoint_convex(psi, 1e300);
  return out;
}

double orlicz_norm(const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                   const Eigen::Ref<const Eigen::VectorXd>& values, const OrliczGenerator& gen) {
  const Eigen::ArrayXd abs_v = values.cwiseAbs().array();
  const double vmax = abs_v.size() ? abs_v.maxCoeff() : 0.0;
  if (vmax == 0.0) return 0.0;

  double top_mass = 0.0;
  for (Eigen::Index i = 0; i < abs_v.size(); ++i) {
    if (abs_v(i) >= vmax * (1.0 - 1e-12)) top_mass += probabilities(i);
  }
  auto mean_psi = [&](double u) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < abs_v.size(); ++i) {
      if (probabilities(i) > 0.0) s += probabilities(i) * gen.psi(abs_v(i) / u);
    }
    return s;
  };

  double hi = vmax / gen.psi_inverse(1.0);
  while (mean_psi(hi) > 1.0) hi *= 1.0 + 1e-12;
  double lo = vmax / gen.psi_inverse(2.0 / top_mass);
  for (int it = 0; it < 400 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_psi(mid) <= 1.0 ? hi : lo) = mid;
  }
  return hi;
}

double orlicz_norm(const DiscreteDistribution& dist, const TabulatedFunction& f,
                   const OrliczGenerator& gen) {
  require_tabulated_on(dist, f);
  return orlicz_norm(dist.probabilities(), f.values, gen);
}

double log_mgf_envelope(const OrliczGenerator& gen, double lambda) {
  if (!gen.exponential_type()) {
    throw UnsupportedGenerator("generator '" + gen.name() + "' is not of exponential type");
  }
  if (lambda <= 0.0) return 0.0;
  if (lambda >= gen.conjugate_domain_sup()) return kInf;

  auto g = [&gen, lambda](double t) { return lambda * t - gen.phi(t); };
  const double peak = gen.phi_conjugate(lambda);
  const double t_max = truncation_point(g, peak, 40.0);
  const double t_peak = maximize_on(g, 0.0, t_max).argmin;

  auto integrand = [&](double t) {
    return 2.0 * lambda * std::exp(g(t) - peak) * -std::expm1(-lambda * t);
  };
  double scaled = 0.0;
  if (t_peak > 0.0) scaled += adaptive_simpson(integrand, 0.0, t_peak, 1e-9);
  scaled += adaptive_simpson(integrand, t_peak, t_max, 1e-9);
  if (!(scaled > 0.0)) return 0.0;
  return log_add_exp_zero(peak + std::log(scaled));
}

double wr_quadrature_bound(const OrliczGenerator& gen, double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw InputError("rate r must be finite and >= 0");
  if (!gen.exponential_type()) {
    throw UnsupportedGenerator("generator '" + gen.name() +
                               "' is not of exponential type; the MGF envelope diverges");
  }
  const double sup = gen.conjugate_domain_sup();
  if (!(sup > 0.0)) throw UnsupportedGenerator("MGF envelope diverges for every lambda > 0");
  if (r == 0.0) return 0.0;

  auto objective = [&gen, r](double lambda) {
    return (r + log_mgf_envelope(gen, lambda)) / lambda;
  };
  SearchOptions opt;
  opt.start = std::min(1.0, 0.5 * sup);
  opt.domain_sup = sup;
  return minimize_positive(objective, opt).value;
}

double conversion_integral(const OrliczGenerator& gen) {
  if (!gen.exponential_type()) {
    throw UnsupportedGenerator("generator '" + gen.name() + "' is not of exponential type");
  }
  // Work with the log-integrand log t - phi(t)/2 to find the peak and cutoff.
  auto log_integrand = [&gen](double t) { return std::log(t) - 0.5 * gen.phi(t); };
  const double search_end = truncation_point(log_integrand, 0.0, 0.0);
  const Minimum peak = maximize_on(log_integrand, 1e-300, search_end);
  const double cutoff = std::max(truncation_point(log_integrand, peak.value, 46.0), peak.argmin);

  auto integrand = [&gen](double t) { return t * std::exp(-0.5 * gen.phi(t)); };
  return adaptive_simpson(integrand, 0.0, peak.argmin, 1e-12) +
         adaptive_simpson(integrand, peak.argmin, cutoff, 1e-12);
}

double conjugate_growth_infimum(const OrliczGenerator& gen) {
  if (!gen.exponential_type()) {
    throw UnsupportedGenerator("generator '" + gen.name() + "' is not of exponential type");
  }
  const double sup = gen.conjugate_domain_sup();
  if (!(sup > 0.0)) return 0.0;
  auto objective = [&gen](double lambda) {
    return std::expm1(gen.phi_conjugate(lambda)) / (lambda * lambda);
  };
  SearchOptions opt;
  opt.start = std::isfinite(sup) ? std::min(1.0, 0.5 * sup) : 1.0;
  opt.domain_sup = sup;
  return std::max(minimize_positive(objective, opt).value, 0.0);
}

double conversion_factor_M(const OrliczGenerator& gen) {
  return conjugate_growth_infimum(gen) / conversion_integral(gen);
}

std::optional<double> closed_form_conversion_factor(const OrliczGenerator& gen) {
  switch (gen.kind()) {
    case GeneratorKind::SubGaussian: return 0.25;
    case GeneratorKind::Bernstein: {
      // inf (e^{phi*} - 1)/lambda^2 = 1/4 (limit at 0) over
      // int t e^{-phi/2} = L^2 + (3/2) sqrt(pi/2) L + 1.
      const double L = gen.parameter();
      return 1.0 / (4.0 * L * L + 3.0 * std::sqrt(2.0 * std::numbers::pi) * L + 4.0);
    }
    default: return std::nullopt;
  }
}

double wr_exponential_type(const OrliczGenerator& gen, double M, double r) {
  if (!(M > 0.0) || !std::isfinite(M)) throw InputError("conversion factor M must be positive");
  if (!(r >= 0.0) || !std::isfinite(r)) throw InputError("rate r must be finite and >= 0");
  if (!gen.exponential_type()) {
    throw UnsupportedGenerator("generator '" + gen.name() + "' is not of exponential type");
  }
  return std::max(3.0, 3.0 / std::sqrt(2.0 * M)) * gen.phi_inverse(2.0 * r / 3.0);
}

}  // namespace tailbound
