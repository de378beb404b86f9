#pragma once

#include "tailbound/numeric.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>

namespace tailbound {

inline constexpr double kProbabilitySumTol = 1e-12;
inline constexpr double kCenteringTol = 1e-10;

// Law of X: finitely many distinct support points in R^d (one per row) with
// their probabilities.
class DiscreteDistribution {
 public:
  DiscreteDistribution(Eigen::MatrixXd support, Eigen::VectorXd probabilities);

  Eigen::Index size() const { return probabilities_.size(); }
  Eigen::Index dim() const { return support_.cols(); }
  const Eigen::MatrixXd& support() const { return support_; }
  const Eigen::VectorXd& probabilities() const { return probabilities_; }

  // E g(X) for g tabulated on the support.
  double expectation(const Eigen::Ref<const Eigen::VectorXd>& values) const {
    return probabilities_.dot(values);
  }

 private:
  Eigen::MatrixXd support_;
  Eigen::VectorXd probabilities_;
};

// A function known only through its values on the support of a distribution.
struct TabulatedFunction {
  Eigen::VectorXd values;

  bool is_zero() const { return (values.array() == 0.0).all(); }
};

inline TabulatedFunction operator-(const TabulatedFunction& f, const TabulatedFunction& g) {
  return {f.values - g.values};
}

// Throws InputError unless f has one value per support point.
void require_tabulated_on(const DiscreteDistribution& dist, const TabulatedFunction& f);

// |E f(X)| <= kCenteringTol.
bool is_centered(const DiscreteDistribution& dist, const TabulatedFunction& f);

// Largest value of a bounded function and the probability it is attained.
struct TopAtom {
  double value = 0.0;
  double mass = 0.0;
};

// lambda -> log E exp(lambda f(X)). Finite on the whole real line for the
// supported models.
class CgfOracle {
 public:
  using Evaluator = std::function<double(double)>;

  CgfOracle(Evaluator evaluator, bool centered, bool zero,
            std::optional<TopAtom> top = std::nullopt)
      : evaluator_(std::move(evaluator)), centered_(centered), zero_(zero), top_(top) {}

  double operator()(double lambda) const { return lambda == 0.0 ? 0.0 : evaluator_(lambda); }

  bool centered() const { return centered_; }
  bool is_zero() const { return zero_; }
  const std::optional<TopAtom>& top_atom() const { return top_; }

  // Oracle of alpha * f for alpha > 0.
  CgfOracle scaled(double alpha) const;

 private:
  Evaluator evaluator_;
  bool centered_;
  bool zero_;
  std::optional<TopAtom> top_;
};

// Exact finite-sum CGF. Uses log1p/expm1 near the origin and log-sum-exp
// elsewhere, so both small and large |lambda| are evaluated without loss.
CgfOracle cgf_discrete(const DiscreteDistribution& dist, const TabulatedFunction& f);

// Analytic CGF of a centered normal variable: lambda^2 sigma^2 / 2.
CgfOracle cgf_gaussian(double stddev);

// T_r(f) = inf_{lambda > 0} (r + Lambda(lambda)) / lambda.
double rate_bound_T(const CgfOracle& oracle, double r);

struct TPropertyReport {
  bool homogeneous = false;
  bool zero_root = false;
  bool subadditive = false;
  bool concave = false;

  double t_r = 0.0;
  double t_s = 0.0;
  double t_sum = 0.0;
  double t_mid = 0.0;
  double t_scaled = 0.0;

  bool all() const { return homogeneous && zero_root && subadditive && concave; }
};

// Positive homogeneity in f, T_0 = 0, subadditivity and midpoint concavity in r.
TPropertyReport check_T_properties(const CgfOracle& oracle, double r, double s, double alpha);

}  // namespace tailbound
