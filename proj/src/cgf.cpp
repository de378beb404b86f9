#include "tailbound/cgf.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace tailbound {

DiscreteDistribution::DiscreteDistribution(Eigen::MatrixXd support, Eigen::VectorXd probabilities)
    : support_(std::move(support)), probabilities_(std::move(probabilities)) {
  if (probabilities_.size() == 0) throw InputError("distribution needs at least one support point");
  if (support_.rows() != probabilities_.size()) {
    throw InputError("support has " + std::to_string(support_.rows()) + " points but " +
                     std::to_string(probabilities_.size()) + " probabilities were given");
  }
  if (!probabilities_.allFinite() || (probabilities_.array() < 0.0).any()) {
    throw InputError("probabilities must be finite and nonnegative");
  }
  if (std::abs(probabilities_.sum() - 1.0) > kProbabilitySumTol) {
    throw InputError("probabilities must sum to 1 within 1e-12");
  }
  if (!support_.allFinite()) throw InputError("support points must be finite");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(support_.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto row_less = [this](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < support_.cols(); ++j) {
      if (support_(a, j) != support_(b, j)) return support_(a, j) < support_(b, j);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), row_less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (support_.row(order[i - 1]) == support_.row(order[i])) {
      throw InputError("support points must be pairwise distinct");
    }
  }
}

void require_tabulated_on(const DiscreteDistribution& dist, const TabulatedFunction& f) {
  if (f.values.size() != dist.size()) {
    throw InputError("function has " + std::to_string(f.values.size()) +
                     " values but the distribution has " + std::to_string(dist.size()) +
                     " support points");
  }
  if (!f.values.allFinite()) throw InputError("function values must be finite");
}

bool is_centered(const DiscreteDistribution& dist, const TabulatedFunction& f) {
  return std::abs(dist.expectation(f.values)) <= kCenteringTol;
}

CgfOracle CgfOracle::scaled(double alpha) const {
  if (!(alpha > 0.0)) throw InputError("scale factor must be positive");
  std::optional<TopAtom> top;
  if (top_) top = TopAtom{alpha * top_->value, top_->mass};
  return CgfOracle([inner = evaluator_, alpha](double lambda) { return inner(alpha * lambda); },
                   centered_, zero_, top);
}

CgfOracle cgf_discrete(const DiscreteDistribution& dist, const TabulatedFunction& f) {
  require_tabulated_on(dist, f);

  // Zero-probability atoms do not contribute to the law.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < dist.size(); ++i) {
    if (dist.probabilities()(i) > 0.0) keep.push_back(i);
  }
  Eigen::VectorXd p(static_cast<Eigen::Index>(keep.size()));
  Eigen::VectorXd v(p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    p(j) = dist.probabilities()(keep[static_cast<std::size_t>(j)]);
    v(j) = f.values(keep[static_cast<std::size_t>(j)]);
  }
  const double vmax = v.maxCoeff();
  const double scale = v.cwiseAbs().maxCoeff();
  const Eigen::VectorXd log_p = p.array().log().matrix();

  TopAtom top{vmax, 0.0};
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (v(j) >= vmax - 1e-12 * scale) top.mass += p(j);
  }

  auto evaluator = [p, v, log_p, scale](double lambda) {
    if (std::abs(lambda) * scale < 0.5) {
      const double s = p.dot((lambda * v).array().expm1().matrix());
      return std::log1p(s);
    }
    return log_sum_exp(log_p + lambda * v);
  };
  return CgfOracle(evaluator, is_centered(dist, f), scale == 0.0, top);
}

CgfOracle cgf_gaussian(double stddev) {
  if (!(stddev >= 0.0) || !std::isfinite(stddev)) {
    throw InputError("standard deviation must be finite and nonnegative");
  }
  const double var = stddev * stddev;
  return CgfOracle([var](double lambda) { return 0.5 * var * lambda * lambda; }, true,
                   stddev == 0.0);
}

double rate_bound_T(const CgfOracle& oracle, double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw InputError("rate r must be finite and >= 0");
  if (!oracle.centered()) throw InputError("T_r requires a centered function (|E f| <= 1e-10)");
  if (r == 0.0 || oracle.is_zero()) return 0.0;

  // For bounded f the objective decreases towards max f as lambda grows and
  // the infimum is this limit exactly when r + log P(f = max f) >= 0.
  if (const auto& top = oracle.top_atom(); top && r + std::log(top->mass) >= 0.0) {
    return std::max(top->value, 0.0);
  }

  auto objective = [&oracle, r](double lambda) { return (r + oracle(lambda)) / lambda; };
  const Minimum m = minimize_positive(objective);
  return std::max(m.value, 0.0);
}

TPropertyReport check_T_properties(const CgfOracle& oracle, double r, double s, double alpha) {
  if (!(r >= 0.0) || !(s >= 0.0)) throw InputError("rates must be nonnegative");
  if (!(alpha > 0.0)) throw InputError("alpha must be positive");

  TPropertyReport rep;
  rep.t_r = rate_bound_T(oracle, r);
  rep.t_s = rate_bound_T(oracle, s);
  rep.t_sum = rate_bound_T(oracle, r + s);
  rep.t_mid = rate_bound_T(oracle, 0.5 * (r + s));
  rep.t_scaled = rate_bound_T(oracle.scaled(alpha), r);

  const double expected = alpha * rep.t_r;
  rep.homogeneous = std::abs(rep.t_scaled - expected) <=
                    1e-8 * std::max({std::abs(expected), std::abs(rep.t_scaled), 1e-300});
  rep.zero_root = std::abs(rate_bound_T(oracle, 0.0)) <= 1e-9;
  rep.subadditive = rep.t_sum <= rep.t_r + rep.t_s + 1e-8;
  rep.concave = rep.t_mid >= 0.5 * (rep.t_r + rep.t_s) - 1e-8;
  return rep;
}

}  // namespace tailbound
