#include "tailbound/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace tailbound {

namespace {

// Number of indices in [0, count) for which `violated` holds, evaluated on
// worker_count() threads. The sum does not depend on scheduling.
template <typename Fn>
long parallel_count(long count, Fn&& violated) {
  const unsigned workers =
      static_cast<unsigned>(std::min<long>(std::max<long>(count, 1), worker_count()));
  if (workers <= 1) {
    long total = 0;
    for (long i = 0; i < count; ++i) total += violated(i) ? 1 : 0;
    return total;
  }
  std::atomic<long> next{0};
  std::atomic<long> total{0};
  constexpr long kChunk = 256;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      long local = 0;
      for (long start = next.fetch_add(kChunk); start < count; start = next.fetch_add(kChunk)) {
        const long stop = std::min(count, start + kChunk);
        for (long i = start; i < stop; ++i) local += violated(i) ? 1 : 0;
      }
      total += local;
    });
  }
  for (auto& t : pool) t.join();
  return total.load();
}

double capped(double g) { return std::min(1.0, g); }

void apply_override(Eigen::VectorXd& thresholds, const std::optional<double>& value) {
  if (value) thresholds.setConstant(*value);
}

const FunctionFamily& require_family(const TrialInputs& inputs) {
  if (!inputs.family) throw InputError("this target needs a function family");
  return *inputs.family;
}

}  // namespace

unsigned worker_count() {
  if (const char* env = std::getenv("TAILBOUND_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Target parse_target(const std::string& name) {
  if (name == "chernoff") return Target::Chernoff;
  if (name == "corollary") return Target::Corollary;
  if (name == "gaussian") return Target::Gaussian;
  if (name == "theorem-main") return Target::TheoremMain;
  throw InputError("unknown verification target '" + name + "'");
}

std::string target_name(Target target) {
  switch (target) {
    case Target::Chernoff: return "chernoff";
    case Target::Corollary: return "corollary";
    case Target::Gaussian: return "gaussian";
    case Target::TheoremMain: return "theorem-main";
  }
  return "unknown";
}

void validate_trial_plan(const TrialPlan& plan) {
  if (plan.trials < 1) throw InputError("trials must be >= 1");
  if (plan.n < 1) throw InputError("sample size n must be >= 1");
  if (!(plan.r > 0.0) || !std::isfinite(plan.r)) throw InputError("rate r must be finite and > 0");
}

VerificationReport make_report(const TrialPlan& plan, long violations, double guarantee) {
  VerificationReport rep;
  rep.target = plan.target;
  rep.n = plan.n;
  rep.r = plan.r;
  rep.k = plan.k;
  rep.trials = plan.trials;
  rep.violations = violations;
  rep.rate = static_cast<double>(violations) / static_cast<double>(plan.trials);
  rep.guarantee = capped(guarantee);
  rep.stderr_ = std::sqrt(rep.rate * (1.0 - rep.rate) / static_cast<double>(plan.trials));
  rep.pass = rep.rate <= rep.guarantee + 3.0 * rep.stderr_;
  return rep;
}

TrackedFunctions chernoff_tracking(const FunctionFamily& family, Index member, const TrialPlan& plan) {
  if (member < 0 || member >= family.size()) throw InputError("member index out of range");
  TrackedFunctions out;
  out.values = family.values().row(member);
  const CgfOracle cgf = cgf_discrete(family.distribution(), TabulatedFunction{family.member(member)});
  out.thresholds = Eigen::VectorXd::Constant(1, rate_bound_T(cgf, plan.r));
  out.guarantee = std::exp(-static_cast<double>(plan.n) * plan.r);
  return out;
}

TrackedFunctions corollary_tracking(const FunctionFamily& family, Index minuend, Index subtrahend,
                                    const TrialPlan& plan) {
  if (minuend < 0 || minuend >= family.size() || subtrahend < 0 || subtrahend >= family.size()) {
    throw InputError("member index out of range");
  }
  TrackedFunctions out;
  const Eigen::VectorXd h = family.member(minuend) - family.member(subtrahend);
  out.values = h.transpose();
  out.thresholds = Eigen::VectorXd::Constant(1, class_wr(family, plan.r) * family.norm_of(h));
  out.guarantee = std::exp(-static_cast<double>(plan.n) * plan.r);
  return out;
}

TrackedFunctions theorem_tracking(const FunctionFamily& family, const ChainBoundReport& report) {
  TrackedFunctions out;
  out.values = family.values();
  out.thresholds = Eigen::Map<const Eigen::VectorXd>(report.thresholds.data(),
                                                     static_cast<Index>(report.thresholds.size()));
  out.guarantee = 2.0 * std::exp(-static_cast<double>(report.n) * report.r);
  return out;
}

GaussianTracking gaussian_tracking(const GaussianModel& model, const TrialPlan& plan,
                                   std::size_t mesh_size, Eigen::Index k, ProjectedTerm projected) {
  if (mesh_size == 0) throw InputError("direction mesh must be nonempty");
  const Eigen::Index d = model.dim();
  GaussianTracking out;
  out.k = k;
  out.directions.resize(static_cast<Eigen::Index>(mesh_size), d);
  out.thresholds.resize(static_cast<Eigen::Index>(mesh_size));

  Stream mesh(mix64(plan.root_seed ^ 0x6D6573682D646972ull));
  for (Eigen::Index i = 0; i < out.directions.rows(); ++i) {
    Eigen::VectorXd u(d);
    do {
      for (Eigen::Index j = 0; j < d; ++j) u(j) = mesh.normal();
    } while (u.norm() == 0.0);
    u /= u.norm();
    out.directions.row(i) = u.transpose();
    out.thresholds(i) =
        gaussian_instance_bound(model, LinearFunctional(u), k, plan.n, plan.r, projected).total;
  }
  out.guarantee = 2.0 * std::exp(-static_cast<double>(plan.n) * plan.r);
  return out;
}

VerificationReport run_discrete_trials(const DiscreteDistribution& dist,
                                       const TrackedFunctions& tracked, const TrialPlan& plan) {
  validate_trial_plan(plan);
  if (tracked.values.cols() != dist.size() || tracked.values.rows() != tracked.thresholds.size()) {
    throw InputError("tracked functions do not match the distribution");
  }
  std::vector<double> cdf(static_cast<std::size_t>(dist.size()));
  double acc = 0.0;
  for (Index i = 0; i < dist.size(); ++i) {
    acc += dist.probabilities()(i);
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  const double nd = static_cast<double>(plan.n);

  const long violations = parallel_count(plan.trials, [&](long trial) {
    Stream rng(trial_seed(plan.root_seed, static_cast<std::uint64_t>(trial)));
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(dist.size());
    for (long s = 0; s < plan.n; ++s) {
      const double u = rng.uniform() * acc;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      // Skip trailing null atoms that share the final cumulative value.
      Index idx = std::min<Index>(it - cdf.begin(), dist.size() - 1);
      while (idx > 0 && dist.probabilities()(idx) == 0.0) --idx;
      counts(idx) += 1.0;
    }
    const Eigen::VectorXd means = tracked.values * counts / nd;
    return ((means - tracked.thresholds).array() > 0.0).any();
  });
  return make_report(plan, violations, tracked.guarantee);
}

VerificationReport run_gaussian_trials(const GaussianModel& model, const GaussianTracking& tracked,
                                       const TrialPlan& plan) {
  validate_trial_plan(plan);
  const Eigen::Index d = model.dim();
  if (tracked.directions.cols() != d) throw InputError("direction mesh dimension mismatch");
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(plan.n));

  const long violations = parallel_count(plan.trials, [&](long trial) {
    Stream rng(trial_seed(plan.root_seed, static_cast<std::uint64_t>(trial)));
    Eigen::VectorXd g(d);
    for (Eigen::Index j = 0; j < d; ++j) g(j) = rng.normal();
    const Eigen::VectorXd z = model.sqrt_covariance() * g * inv_sqrt_n;
    const Eigen::VectorXd means = tracked.directions * z;
    return ((means - tracked.thresholds).array() > 0.0).any();
  });
  return make_report(plan, violations, tracked.guarantee);
}

VerificationReport run_trials(const TrialPlan& plan, const TrialInputs& inputs) {
  validate_trial_plan(plan);
  switch (plan.target) {
    case Target::Chernoff: {
      const FunctionFamily& family = require_family(inputs);
      const Index member = inputs.member.value_or(family.size() > 1 ? 1 : 0);
      TrackedFunctions tracked = chernoff_tracking(family, member, plan);
      apply_override(tracked.thresholds, inputs.threshold_override);
      return run_discrete_trials(family.distribution(), tracked, plan);
    }
    case Target::Corollary: {
      const FunctionFamily& family = require_family(inputs);
      const Index minuend = inputs.member.value_or(family.size() > 1 ? 1 : 0);
      TrackedFunctions tracked = corollary_tracking(family, minuend, inputs.subtrahend, plan);
      apply_override(tracked.thresholds, inputs.threshold_override);
      return run_discrete_trials(family.distribution(), tracked, plan);
    }
    case Target::TheoremMain: {
      const FunctionFamily& family = require_family(inputs);
      const ChainBoundReport report =
          theorem_main_bound(family, build_deflation(family, plan.k), plan.n, plan.r);
      TrackedFunctions tracked = theorem_tracking(family, report);
      apply_override(tracked.thresholds, inputs.threshold_override);
      return run_discrete_trials(family.distribution(), tracked, plan);
    }
    case Target::Gaussian: {
      if (!inputs.gaussian) throw InputError("the gaussian target needs a covariance model");
      const Eigen::Index k = plan.k < 0 ? optimal_rank(*inputs.gaussian, plan.n, plan.r) : plan.k;
      GaussianTracking tracked =
          gaussian_tracking(*inputs.gaussian, plan, inputs.mesh_size, k, inputs.projected);
      apply_override(tracked.thresholds, inputs.threshold_override);
      TrialPlan resolved = plan;
      resolved.k = static_cast<int>(k);
      return run_gaussian_trials(*inputs.gaussian, tracked, resolved);
    }
  }
  throw InputError("unknown verification target");
}

std::vector<VerificationReport> sweep(const TrialPlan& base, const SweepGrid& grid,
                                      const TrialInputs& inputs) {
  if (grid.n.empty() || grid.r.empty() || grid.k.empty()) throw InputError("sweep grid must be nonempty");
  std::vector<VerificationReport> out;
  for (long n : grid.n) {
    for (double r : grid.r) {
      for (int k : grid.k) {
        TrialPlan plan = base;
        plan.n = n;
        plan.r = r;
        plan.k = k;
        out.push_back(run_trials(plan, inputs));
      }
    }
  }
  return out;
}

}  // namespace tailbound
