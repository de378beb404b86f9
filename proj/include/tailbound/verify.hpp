#pragma once

#include "tailbound/chaining.hpp"
#include "tailbound/gaussian.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace tailbound {

// SplitMix64 output function (Steele, Lea, Flood 2014): constants
// 0x9E3779B97F4A7C15, 0xBF58476D1CE4E5B9, 0x94D049BB133111EB.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Counter-based stream seed for trial `index` under `root`.
constexpr std::uint64_t trial_seed(std::uint64_t root, std::uint64_t index) {
  return mix64(mix64(root) ^ mix64(index + 0xD1B54A32D192ED03ull));
}

// Per-stream generator: std::mt19937_64 seeded with one 64-bit word.
// Uniforms take the top 53 bits; normals use the Box-Muller transform, so
// every draw is specified independently of the standard library.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

enum class Target { Chernoff, Corollary, Gaussian, TheoremMain };

Target parse_target(const std::string& name);
std::string target_name(Target target);

struct TrialPlan {
  Target target = Target::Chernoff;
  long n = 1;
  double r = 0.0;
  int k = 0;
  long trials = 1;
  std::uint64_t root_seed = 0;
};

// Throws InputError unless trials >= 1, n >= 1 and r > 0.
void validate_trial_plan(const TrialPlan& plan);

struct VerificationReport {
  Target target = Target::Chernoff;
  long n = 0;
  double r = 0.0;
  int k = 0;
  long trials = 0;
  long violations = 0;
  double rate = 0.0;
  double guarantee = 0.0;  // ceiling on the violation probability, capped at 1
  double stderr_ = 0.0;    // sqrt(rate (1 - rate) / trials)
  bool pass = false;       // rate <= guarantee + 3 stderr
};

VerificationReport make_report(const TrialPlan& plan, long violations, double guarantee);

// Functions whose empirical means are compared against fixed thresholds.
struct TrackedFunctions {
  Eigen::MatrixXd values;  // rows = functions, cols = support points
  Eigen::VectorXd thresholds;
  double guarantee = 0.0;
};

TrackedFunctions chernoff_tracking(const FunctionFamily& family, Index member, const TrialPlan& plan);
TrackedFunctions corollary_tracking(const FunctionFamily& family, Index minuend, Index subtrahend,
                                    const TrialPlan& plan);
TrackedFunctions theorem_tracking(const FunctionFamily& family, const ChainBoundReport& report);

struct GaussianTracking {
  Eigen::MatrixXd directions;  // rows = unit vectors
  Eigen::VectorXd thresholds;
  double guarantee = 0.0;
  Eigen::Index k = 0;
};

// Mesh of `mesh_size` unit directions (normalized standard-normal draws from
// a stream reserved for the mesh) with their rank-k totals.
GaussianTracking gaussian_tracking(const GaussianModel& model, const TrialPlan& plan,
                                   std::size_t mesh_size, Eigen::Index k,
                                   ProjectedTerm projected = ProjectedTerm::Truncated);

// n i.i.d. draws per trial by inverse-CDF sampling; a trial violates when some
// tracked empirical mean strictly exceeds its threshold.
VerificationReport run_discrete_trials(const DiscreteDistribution& dist,
                                       const TrackedFunctions& tracked, const TrialPlan& plan);

// One Gaussian vector per trial: E_n <u, X> = <Sigma^{1/2} u, G> / sqrt(n).
VerificationReport run_gaussian_trials(const GaussianModel& model, const GaussianTracking& tracked,
                                       const TrialPlan& plan);

// Everything a target needs besides the plan.
struct TrialInputs {
  const FunctionFamily* family = nullptr;   // chernoff, corollary, theorem-main
  const GaussianModel* gaussian = nullptr;  // gaussian
  std::optional<Index> member;              // chernoff member / corollary minuend
  Index subtrahend = 0;                     // corollary
  std::size_t mesh_size = 1000;
  ProjectedTerm projected = ProjectedTerm::Truncated;
  std::optional<double> threshold_override;
};

VerificationReport run_trials(const TrialPlan& plan, const TrialInputs& inputs);

struct SweepGrid {
  std::vector<long> n;
  std::vector<double> r;
  std::vector<int> k;
};

// One report per (n, r, k) grid point, in row-major order n, r, k.
std::vector<VerificationReport> sweep(const TrialPlan& base, const SweepGrid& grid,
                                      const TrialInputs& inputs);

// Worker count from TAILBOUND_THREADS, else hardware concurrency.
unsigned worker_count();

}  // namespace tailbound
