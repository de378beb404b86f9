#pragma once

#include "tailbound/cgf.hpp"
#include "tailbound/orlicz.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tailbound {

using Index = Eigen::Index;

// sup_{lambda != 0} sqrt(2 Lambda(lambda)) / |lambda| for a tabulated function.
// The lambda -> 0 limit (the variance) is included; the remaining supremum is
// located on a log-spaced grid and refined by golden section.
double cgf_norm_discrete(const DiscreteDistribution& dist,
                         const Eigen::Ref<const Eigen::VectorXd>& values);

// Norm used to measure members and their differences: either the CGF norm
// above or an Orlicz norm.
class FunctionNorm {
 public:
  static FunctionNorm cgf() { return FunctionNorm(std::nullopt); }
  static FunctionNorm orlicz(OrliczGenerator gen) { return FunctionNorm(std::move(gen)); }

  bool is_cgf() const { return !generator_; }
  const std::optional<OrliczGenerator>& generator() const { return generator_; }
  std::string name() const { return generator_ ? "orlicz:" + generator_->name() : "cgf"; }

  double operator()(const DiscreteDistribution& dist,
                    const Eigen::Ref<const Eigen::VectorXd>& values) const;

 private:
  explicit FunctionNorm(std::optional<OrliczGenerator> gen) : generator_(std::move(gen)) {}
  std::optional<OrliczGenerator> generator_;
};

// Finite family of centered functions on a discrete law. Member 0 is always
// the zero function; it is inserted when the caller does not supply one.
class FunctionFamily {
 public:
  FunctionFamily(DiscreteDistribution dist, std::vector<std::string> names,
                 std::vector<TabulatedFunction> members, FunctionNorm norm = FunctionNorm::cgf());

  Index size() const { return static_cast<Index>(names_.size()); }
  const DiscreteDistribution& distribution() const { return dist_; }
  const FunctionNorm& norm() const { return norm_; }
  const std::string& name(Index i) const { return names_[static_cast<std::size_t>(i)]; }
  // Members as rows, one column per support point.
  const Eigen::MatrixXd& values() const { return values_; }
  auto member(Index i) const { return values_.row(i).transpose(); }
  double member_norm(Index i) const { return norms_(i); }
  const Eigen::VectorXd& member_norms() const { return norms_; }

  double norm_of(const Eigen::Ref<const Eigen::VectorXd>& values) const {
    return norm_(dist_, values);
  }
  // Index of the member with this name; throws InputError if absent.
  Index find(const std::string& name) const;

 private:
  DiscreteDistribution dist_;
  std::vector<std::string> names_;
  Eigen::MatrixXd values_;
  Eigen::VectorXd norms_;
  FunctionNorm norm_;
};

// w_r over the difference class F - F, reusing the normalized difference
// oracles across rates.
class ClassCoefficient {
 public:
  explicit ClassCoefficient(const FunctionFamily& family);

  double operator()(double r) const;
  std::size_t difference_count() const { return oracles_.size(); }

 private:
  std::vector<CgfOracle> oracles_;
};

// sup over nonzero h in F - F of T_r(h / ||h||).
double class_wr(const FunctionFamily& family, double r);

// A[f_i] = f_{assignment[i]} with at most floor(e^k) distinct images.
struct DeflationPlan {
  std::vector<Index> assignment;
  int k = 0;
};

// Throws InputError unless the plan maps into the family, fixes 0, does not
// increase norms (slack 1e-12) and respects the range budget.
void validate_plan(const FunctionFamily& family, const DeflationPlan& plan);

// floor(e^k), saturated at `cap`.
Index range_budget(int k, Index cap);

// Greedy k-center deflation (farthest-first centers from 0, nearest
// admissible center per member). k = 0 gives the trivial plan A = 0.
DeflationPlan build_deflation(const FunctionFamily& family, int k);

// The trivial plan A[f] = 0.
DeflationPlan trivial_plan(const FunctionFamily& family);

// Distinct elements f - A[f]; element 0 is the zero function.
struct DeflatedSet {
  std::vector<Eigen::VectorXd> elements;
  std::vector<Index> member_element;  // member i -> element index
  Eigen::MatrixXd distance;           // pairwise norms of differences

  Index size() const { return static_cast<Index>(elements.size()); }
};

DeflatedSet deflate(const FunctionFamily& family, const DeflationPlan& plan);

// Deflated set for an explicit list of functions (zero is prepended if absent).
DeflatedSet make_set(const FunctionFamily& family, const std::vector<Eigen::VectorXd>& elements);

// 2^{2^level}, saturated.
std::uint64_t level_cap(int level);

// First level l >= 1 with 2^{2^l} >= size; 0 when size == 1.
int chain_depth(Index size);

// Radius max_a min_{q in cover} d(a, q).
double cover_radius(const DeflatedSet& set, const std::vector<Index>& cover);

struct CoverResult {
  double value = 0.0;
  std::vector<Index> cover;
  bool exhaustive = false;
};

// Best cover of size <= 2^{2^level}. Exact for |A| <= 12, greedy otherwise.
CoverResult epsilon_ell(const DeflatedSet& set, int level);

// Exhaustive enumeration; only for sets with at most 12 elements.
CoverResult epsilon_ell_exhaustive(const DeflatedSet& set, int level);

// Farthest-first cover starting from the zero element.
CoverResult epsilon_ell_greedy(const DeflatedSet& set, int level);

// Rate (2^{l+3} + l + 2) log 2 / n used for the level-l weight.
double gamma_rate(int level, long n);

struct GammaCertificate {
  std::vector<std::vector<Index>> levels;  // A_0 = {0}, ..., nested
  std::vector<double> weights;             // w at gamma_rate(l, n)
  double value = 0.0;
  bool exhaustive = false;
};

// max_a sum_l 2 w_l d(a, A_l) for the certificate's levels and weights.
double replay_gamma(const DeflatedSet& set, const GammaCertificate& cert);

// Throws InputError unless levels are nested, start at {0}, respect the caps.
void validate_gamma_certificate(const DeflatedSet& set, const GammaCertificate& cert);

// Level weights w_{gamma_rate(l, n)} for l < chain_depth(|A|).
std::vector<double> gamma_weights(const DeflatedSet& set, const ClassCoefficient& w, long n);

GammaCertificate gamma_greedy(const DeflatedSet& set, const std::vector<double>& weights);
// All nested admissible sequences; only for |A| <= 8.
GammaCertificate gamma_exhaustive(const DeflatedSet& set, const std::vector<double>& weights);

// Greedy sequence, replaced by the exhaustive optimum when |A| <= 8.
GammaCertificate gamma_functional(const DeflatedSet& set, const ClassCoefficient& w, long n);

struct ChainBoundReport {
  long n = 0;
  double r = 0.0;
  DeflationPlan plan;
  double w_r = 0.0;
  double w_r_plus = 0.0;  // w_{r + k/n}
  GammaCertificate gamma;
  std::vector<CoverResult> covers;  // epsilon_l for l < chain_depth
  double epsilon_sum = 0.0;
  double total_rhs = 0.0;
  std::vector<double> thresholds;  // w_{r+k/n} ||f|| + total_rhs per member
  double probability_level = 0.0;  // 1 - 2 e^{-nr}
};

// gamma(A) + 2 w_r sum_l epsilon_l(A), with per-member thresholds.
ChainBoundReport theorem_main_bound(const FunctionFamily& family, const DeflationPlan& plan,
                                    long n, double r);

struct ReplayValues {
  double gamma = 0.0;
  double epsilon_sum = 0.0;
  double total_rhs = 0.0;
  std::vector<double> thresholds;
};

// Recomputes the report's values from its certificate (plan, levels, covers,
// weights) without re-running any optimization.
ReplayValues replay_report(const FunctionFamily& family, const ChainBoundReport& report);

struct DeflationChoice {
  ChainBoundReport report;
  double objective = 0.0;
  std::vector<std::pair<int, double>> candidates;  // (k, objective)
};

// total_rhs + (w_{r+k/n} - w_r) max_f ||f||.
double deflation_objective(const FunctionFamily& family, const ChainBoundReport& report);

// Best k among the candidates; ties to the smallest k.
DeflationChoice optimize_deflation(const FunctionFamily& family, long n, double r,
                                   std::vector<int> k_candidates);

}  // namespace tailbound
