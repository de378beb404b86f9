#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace tailbound {

// Violated precondition on user-supplied input. The CLI maps it to exit 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical machinery failed to converge (bracketing, quadrature). Exit 1.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// log(sum_i exp(x_i)) without overflow. Empty input or all -inf gives -inf.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) return -std::numeric_limits<Scalar>::infinity();
  const Scalar m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

struct Minimum {
  double argmin = 0.0;
  double value = 0.0;
  // True when the search stopped at the lower floor or upper cap instead of an
  // interior bracket; the value is then the boundary objective.
  bool at_boundary = false;
};

struct SearchOptions {
  double start = 1.0;
  // Exclusive upper limit of the domain (may be infinite).
  double domain_sup = kInf;
  double cap = 1e8;
  double floor = 1e-12;
  double rel_width = 1e-10;
};

// Minimizes a quasiconvex objective over (0, domain_sup). Doubles (or halves)
// from `start` until the objective rises on both flanks, then refines the
// bracket by golden-section search to relative width `rel_width`.
Minimum minimize_positive(const std::function<double(double)>& objective,
                          const SearchOptions& options = {});

// Golden-section minimization of a unimodal function on [lo, hi].
Minimum golden_section(const std::function<double(double)>& objective, double lo,
                       double hi, double rel_width = 1e-10);

// Adaptive Simpson quadrature on [a, b] with relative tolerance `rel_tol`.
// Throws NumericError when the recursion depth is exhausted.
double adaptive_simpson(const std::function<double(double)>& integrand, double a,
                        double b, double rel_tol = 1e-9, int max_depth = 60);

}  // namespace tailbound
