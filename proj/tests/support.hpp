#pragma once

// Helpers shared by the unit and acceptance tests. The oracles here are
// deliberately naive (long double sums, dense grids) and share no code with
// the library's search routines.

#include "tailbound/chaining.hpp"

#include <Eigen/Core>

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace tbtest {

inline std::string fixture(const std::string& name) { return std::string(TB_FIXTURE_DIR) + "/" + name; }

// log sum p_i exp(lambda v_i), summed in long double without shifting.
inline double naive_cgf(const Eigen::VectorXd& p, const Eigen::VectorXd& v, double lambda) {
  long double s = 0.0L;
  for (Eigen::Index i = 0; i < p.size(); ++i) s += p(i) * std::exp(static_cast<long double>(lambda) * v(i));
  return static_cast<double>(std::log(s));
}

// min over a uniform grid of `points` values in (0, lambda_max] of (r + Lambda) / lambda.
inline double grid_T(const Eigen::VectorXd& p, const Eigen::VectorXd& v, double r,
                     double lambda_max = 50.0, long points = 1000000) {
  double best = INFINITY;
  for (long i = 1; i <= points; ++i) {
    const double lam = lambda_max * static_cast<double>(i) / static_cast<double>(points);
    best = std::min(best, (r + naive_cgf(p, v, lam)) / lam);
  }
  return best;
}

// Probability vector on `size` atoms, bounded away from zero.
inline Eigen::VectorXd random_probabilities(std::mt19937_64& rng, Eigen::Index size) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::VectorXd p(size);
  for (Eigen::Index i = 0; i < size; ++i) p(i) = u(rng);
  return p / p.sum();
}

// Random values recentred under p.
inline Eigen::VectorXd random_centered(std::mt19937_64& rng, const Eigen::VectorXd& p, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) v(i) = g(rng);
  return v.array() - p.dot(v);
}

inline Eigen::MatrixXd line_support(Eigen::Index size) {
  Eigen::MatrixXd s(size, 1);
  for (Eigen::Index i = 0; i < size; ++i) s(i, 0) = static_cast<double>(i);
  return s;
}

// `members` random centered functions (plus the implicit zero member).
inline tailbound::FunctionFamily random_family(std::mt19937_64& rng, Eigen::Index support, int members,
                                               tailbound::FunctionNorm norm = tailbound::FunctionNorm::cgf()) {
  const Eigen::VectorXd p = random_probabilities(rng, support);
  std::vector<std::string> names;
  std::vector<tailbound::TabulatedFunction> funcs;
  for (int i = 0; i < members; ++i) {
    names.push_back("f" + std::to_string(i + 1));
    funcs.push_back({random_centered(rng, p)});
  }
  return tailbound::FunctionFamily(tailbound::DiscreteDistribution(line_support(support), p),
                                   std::move(names), std::move(funcs), std::move(norm));
}

// Exact epsilon_l by enumerating every subset of size min(cap, |A|).
inline double brute_epsilon(const tailbound::DeflatedSet& set, std::uint64_t cap) {
  const int size = static_cast<int>(set.size());
  if (cap >= static_cast<std::uint64_t>(size)) return 0.0;
  double best = INFINITY;
  for (unsigned mask = 1; mask < (1u << size); ++mask) {
    if (static_cast<std::uint64_t>(__builtin_popcount(mask)) != cap) continue;
    double radius = 0.0;
    for (int a = 0; a < size; ++a) {
      double nearest = INFINITY;
      for (int q = 0; q < size; ++q) {
        if (mask & (1u << q)) nearest = std::min(nearest, set.distance(a, q));
      }
      radius = std::max(radius, nearest);
    }
    best = std::min(best, radius);
  }
  return best;
}

// Exact gamma by recursion over nested admissible sequences A_0 = {0} c A_1 c ...
inline double brute_gamma(const tailbound::DeflatedSet& set, const std::vector<double>& weights) {
  const int size = static_cast<int>(set.size());
  const int depth = static_cast<int>(weights.size());
  double best = INFINITY;
  std::vector<unsigned> chosen(static_cast<std::size_t>(depth));
  auto score = [&]() {
    double worst = 0.0;
    for (int a = 0; a < size; ++a) {
      double sum = 0.0;
      for (int l = 0; l < depth; ++l) {
        double nearest = INFINITY;
        for (int q = 0; q < size; ++q) {
          if (chosen[l] & (1u << q)) nearest = std::min(nearest, set.distance(a, q));
        }
        sum += 2.0 * weights[l] * nearest;
      }
      worst = std::max(worst, sum);
    }
    return worst;
  };
  auto recurse = [&](auto&& self, int level) -> void {
    if (level == depth) {
      best = std::min(best, score());
      return;
    }
    if (level == 0) {
      chosen[0] = 1u;
      self(self, 1);
      return;
    }
    const std::uint64_t cap = tailbound::level_cap(level);
    for (unsigned mask = 1; mask < (1u << size); ++mask) {
      if ((mask & chosen[level - 1]) != chosen[level - 1]) continue;
      if (static_cast<std::uint64_t>(__builtin_popcount(mask)) > cap) continue;
      chosen[level] = mask;
      self(self, level + 1);
    }
  };
  if (depth == 0) return 0.0;
  recurse(recurse, 0);
  return best;
}

}  // namespace tbtest
