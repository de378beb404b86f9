#include "tailbound/chaining.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

namespace tailbound {

namespace {

constexpr double kNormSlack = 1e-12;
constexpr Index kExhaustiveCoverLimit = 12;
constexpr Index kExhaustiveGammaLimit = 8;

Minimum maximize_on(const std::function<double(double)>& g, double lo, double hi) {
  Minimum m = golden_section([&g](double x) { return -g(x); }, lo, hi, 1e-12);
  m.value = -m.value;
  return m;
}

Index argmax_smallest(const Eigen::VectorXd& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

DeflatedSet finish_set(const FunctionFamily& family, DeflatedSet set) {
  const Index m = set.size();
  set.distance = Eigen::MatrixXd::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      const double d = family.norm_of(set.elements[i] - set.elements[j]);
      set.distance(i, j) = set.distance(j, i) = d;
    }
  }
  return set;
}

Index intern(DeflatedSet& set, const Eigen::VectorXd& v) {
  for (Index e = 0; e < set.size(); ++e) {
    if (set.elements[static_cast<std::size_t>(e)] == v) return e;
  }
  set.elements.push_back(v);
  return set.size() - 1;
}

std::vector<Index> mask_to_indices(std::uint32_t mask) {
  std::vector<Index> out;
  for (Index i = 0; mask; ++i, mask >>= 1) {
    if (mask & 1u) out.push_back(i);
  }
  return out;
}

ChainBoundReport assemble_bound(const FunctionFamily& family, const DeflationPlan& plan, long n,
                                double r, const ClassCoefficient& w) {
  validate_plan(family, plan);
  if (n <= 0) throw InputError("sample size n must be positive");
  if (!(r > 0.0) || !std::isfinite(r)) throw InputError("rate r must be finite and > 0");

  ChainBoundReport rep;
  rep.n = n;
  rep.r = r;
  rep.plan = plan;
  rep.w_r = w(r);
  rep.w_r_plus = w(r + static_cast<double>(plan.k) / static_cast<double>(n));

  const DeflatedSet set = deflate(family, plan);
  rep.gamma = gamma_functional(set, w, n);
  const int depth = chain_depth(set.size());
  for (int level = 0; level < depth; ++level) {
    rep.covers.push_back(epsilon_ell(set, level));
    rep.epsilon_sum += rep.covers.back().value;
  }
  rep.total_rhs = rep.gamma.value + 2.0 * rep.w_r * rep.epsilon_sum;
  rep.thresholds.resize(static_cast<std::size_t>(family.size()));
  for (Index i = 0; i < family.size(); ++i) {
    rep.thresholds[static_cast<std::size_t>(i)] = rep.w_r_plus * family.member_norm(i) + rep.total_rhs;
  }
  rep.probability_level = 1.0 - 2.0 * std::exp(-static_cast<double>(n) * r);
  return rep;
}

}  // namespace

double cgf_norm_discrete(const DiscreteDistribution& dist,
                         const Eigen::Ref<const Eigen::VectorXd>& values) {
  const TabulatedFunction f{values};
  const CgfOracle cgf = cgf_discrete(dist, f);
  if (cgf.is_zero()) return 0.0;

  const Eigen::VectorXd& p = dist.probabilities();
  const double mean = p.dot(values);
  const double variance = std::max(0.0, p.dot((values.array() - mean).square().matrix()));
  double scale = 0.0;
  for (Index i = 0; i < values.size(); ++i) {
    if (p(i) > 0.0) scale = std::max(scale, std::abs(values(i)));
  }

  auto ratio = [&cgf](double lambda) { return 2.0 * cgf(lambda) / (lambda * lambda); };
  constexpr int kGrid = 241;
  double best = variance;
  for (double sign : {1.0, -1.0}) {
    std::vector<double> grid(kGrid), vals(kGrid);
    for (int i = 0; i < kGrid; ++i) {
      grid[i] = sign * std::pow(10.0, -3.0 + 6.0 * i / (kGrid - 1)) / scale;
      vals[i] = ratio(grid[i]);
    }
    const auto top = std::max_element(vals.begin(), vals.end()) - vals.begin();
    const double lo = grid[static_cast<std::size_t>(std::max<std::ptrdiff_t>(top - 1, 0))];
    const double hi = grid[static_cast<std::size_t>(std::min<std::ptrdiff_t>(top + 1, kGrid - 1))];
    const Minimum m = maximize_on(ratio, std::min(lo, hi), std::max(lo, hi));
    best = std::max({best, vals[static_cast<std::size_t>(top)], m.value});
  }
  return std::sqrt(best);
}

double FunctionNorm::operator()(const DiscreteDistribution& dist,
                                const Eigen::Ref<const Eigen::VectorXd>& values) const {
  if (generator_) return orlicz_norm(dist.probabilities(), values, *generator_);
  return cgf_norm_discrete(dist, values);
}

FunctionFamily::FunctionFamily(DiscreteDistribution dist, std::vector<std::string> names,
                               std::vector<TabulatedFunction> members, FunctionNorm norm)
    : dist_(std::move(dist)), norm_(std::move(norm)) {
  if (members.empty()) throw InputError("function family must contain at least one function");
  if (names.size() != members.size()) throw InputError("one name per family member is required");

  std::set<std::string> seen;
  std::optional<std::size_t> zero;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (!seen.insert(names[i]).second) throw InputError("duplicate member name '" + names[i] + "'");
    require_tabulated_on(dist_, members[i]);
    if (!is_centered(dist_, members[i])) {
      throw InputError("member '" + names[i] + "' is not centered (|E f| > 1e-10)");
    }
    if (!zero && members[i].is_zero()) zero = i;
  }

  std::vector<std::size_t> order;
  if (zero) {
    order.push_back(*zero);
    names_.push_back(names[*zero]);
  } else {
    std::string zero_name = "0";
    while (seen.count(zero_name)) zero_name += "'";
    names_.push_back(zero_name);
  }
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (zero && i == *zero) continue;
    order.push_back(i);
    names_.push_back(names[i]);
  }

  values_ = Eigen::MatrixXd::Zero(static_cast<Index>(names_.size()), dist_.size());
  const Index offset = zero ? 0 : 1;
  for (std::size_t j = 0; j < order.size(); ++j) {
    values_.row(static_cast<Index>(j) + offset) = members[order[j]].values.transpose();
  }
  norms_.resize(size());
  for (Index i = 0; i < size(); ++i) norms_(i) = norm_of(member(i));
}

Index FunctionFamily::find(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw InputError("no family member named '" + name + "'");
  return it - names_.begin();
}

ClassCoefficient::ClassCoefficient(const FunctionFamily& family) {
  const Eigen::VectorXd& p = family.distribution().probabilities();
  for (Index i = 0; i < family.size(); ++i) {
    for (Index j = 0; j < family.size(); ++j) {
      if (i == j) continue;
      const Eigen::VectorXd h = family.member(i) - family.member(j);
      const double nrm = family.norm_of(h);
      if (nrm <= kNormSlack) {
        if (p.dot(h.cwiseAbs2()) > 1e-20) {
          throw NumericError("nonzero difference with vanishing norm");
        }
        continue;
      }
      // Differences of centered members are centered; only rounding separates
      // their mean from zero.
      CgfOracle o = cgf_discrete(family.distribution(), TabulatedFunction{h / nrm});
      oracles_.emplace_back([o](double lambda) { return o(lambda); }, true, o.is_zero(),
                            o.top_atom());
    }
  }
}

double ClassCoefficient::operator()(double r) const {
  if (!(r >= 0.0) || !std::isfinite(r)) throw InputError("rate r must be finite and >= 0");
  double best = 0.0;
  for (const CgfOracle& o : oracles_) best = std::max(best, rate_bound_T(o, r));
  return best;
}

double class_wr(const FunctionFamily& family, double r) { return ClassCoefficient(family)(r); }

Index range_budget(int k, Index cap) {
  if (k < 0) throw InputError("deflation budget k must be >= 0");
  if (k >= 40) return cap;
  return std::min<Index>(cap, static_cast<Index>(std::floor(std::exp(static_cast<double>(k)))));
}

void validate_plan(const FunctionFamily& family, const DeflationPlan& plan) {
  if (static_cast<Index>(plan.assignment.size()) != family.size()) {
    throw InputError("deflation plan has " + std::to_string(plan.assignment.size()) +
                     " entries but the family has " + std::to_string(family.size()) + " members");
  }
  if (plan.k < 0) throw InputError("deflation budget k must be >= 0");
  std::set<Index> range;
  for (Index i = 0; i < family.size(); ++i) {
    const Index a = plan.assignment[static_cast<std::size_t>(i)];
    if (a < 0 || a >= family.size()) throw InputError("deflation plan maps outside the family");
    if (family.member_norm(a) > family.member_norm(i) + kNormSlack) {
      throw InputError("deflation plan increases the norm of member '" + family.name(i) + "'");
    }
    range.insert(a);
  }
  if (plan.assignment[0] != 0) throw InputError("deflation plan must map 0 to 0");
  if (static_cast<Index>(range.size()) > range_budget(plan.k, family.size())) {
    throw InputError("deflation plan range exceeds e^k");
  }
}

DeflationPlan trivial_plan(const FunctionFamily& family) {
  return {std::vector<Index>(static_cast<std::size_t>(family.size()), 0), 0};
}

DeflationPlan build_deflation(const FunctionFamily& family, int k) {
  const Index budget = range_budget(k, family.size());
  const Index m = family.size();

  std::vector<Index> centers{0};
  std::vector<Eigen::VectorXd> center_dist{family.member_norms()};
  Eigen::VectorXd nearest = family.member_norms();
  while (static_cast<Index>(centers.size()) < budget) {
    const Index next = argmax_smallest(nearest);
    if (nearest(next) <= 0.0) break;
    Eigen::VectorXd d(m);
    for (Index j = 0; j < m; ++j) d(j) = j == next ? 0.0 : family.norm_of(family.member(j) - family.member(next));
    nearest = nearest.cwiseMin(d);
    centers.push_back(next);
    center_dist.push_back(std::move(d));
  }

  std::vector<std::size_t> by_index(centers.size());
  for (std::size_t c = 0; c < by_index.size(); ++c) by_index[c] = c;
  std::sort(by_index.begin(), by_index.end(),
            [&centers](std::size_t a, std::size_t b) { return centers[a] < centers[b]; });

  DeflationPlan plan{std::vector<Index>(static_cast<std::size_t>(m), 0), k};
  for (Index j = 0; j < m; ++j) {
    Index best = 0;
    double best_d = family.member_norm(j);
    for (std::size_t c : by_index) {
      const Index center = centers[c];
      if (family.member_norm(center) > family.member_norm(j) + kNormSlack) continue;
      const double d = center_dist[c](j);
      if (d < best_d) {
        best = center;
        best_d = d;
      }
    }
    plan.assignment[static_cast<std::size_t>(j)] = best;
  }
  return plan;
}

DeflatedSet deflate(const FunctionFamily& family, const DeflationPlan& plan) {
  validate_plan(family, plan);
  DeflatedSet set;
  set.elements.push_back(Eigen::VectorXd::Zero(family.distribution().size()));
  for (Index i = 0; i < family.size(); ++i) {
    const Eigen::VectorXd diff =
        family.member(i) - family.member(plan.assignment[static_cast<std::size_t>(i)]);
    set.member_element.push_back(intern(set, diff));
  }
  return finish_set(family, std::move(set));
}

DeflatedSet make_set(const FunctionFamily& family, const std::vector<Eigen::VectorXd>& elements) {
  DeflatedSet set;
  set.elements.push_back(Eigen::VectorXd::Zero(family.distribution().size()));
  for (const auto& e : elements) {
    if (e.size() != family.distribution().size()) throw InputError("element size mismatch");
    intern(set, e);
  }
  return finish_set(family, std::move(set));
}

std::uint64_t level_cap(int level) {
  if (level < 0) throw InputError("level must be >= 0");
  if (level >= 6) return std::numeric_limits<std::uint64_t>::max();
  return std::uint64_t{1} << (1u << level);
}

int chain_depth(Index size) {
  if (size <= 1) return 0;
  int level = 1;
  while (level_cap(level) < static_cast<std::uint64_t>(size)) ++level;
  return level;
}

double cover_radius(const DeflatedSet& set, const std::vector<Index>& cover) {
  if (cover.empty()) return kInf;
  double radius = 0.0;
  for (Index a = 0; a < set.size(); ++a) {
    double nearest = kInf;
    for (Index q : cover) nearest = std::min(nearest, set.distance(a, q));
    radius = std::max(radius, nearest);
  }
  return radius;
}

CoverResult epsilon_ell_exhaustive(const DeflatedSet& set, int level) {
  const Index m = set.size();
  if (m > kExhaustiveCoverLimit) throw InputError("exhaustive covering limited to 12 elements");
  const std::uint64_t cap = level_cap(level);
  if (cap >= static_cast<std::uint64_t>(m)) {
    std::vector<Index> all(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) all[static_cast<std::size_t>(i)] = i;
    return {0.0, all, true};
  }
  const int size = static_cast<int>(cap);
  // Lexicographic enumeration of size-`size` index combinations.
  std::vector<Index> combo(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) combo[static_cast<std::size_t>(i)] = i;
  CoverResult best{kInf, {}, true};
  for (;;) {
    const double radius = cover_radius(set, combo);
    if (radius < best.value) best = {radius, combo, true};
    int i = size - 1;
    while (i >= 0 && combo[static_cast<std::size_t>(i)] == m - size + i) --i;
    if (i < 0) break;
    ++combo[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < size; ++j) {
      combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return best;
}

CoverResult epsilon_ell_greedy(const DeflatedSet& set, int level) {
  const Index m = set.size();
  const std::uint64_t cap = level_cap(level);
  CoverResult out{0.0, {0}, false};
  Eigen::VectorXd nearest = set.distance.col(0);
  while (static_cast<std::uint64_t>(out.cover.size()) < cap &&
         static_cast<Index>(out.cover.size()) < m) {
    const Index next = argmax_smallest(nearest);
    if (nearest(next) <= 0.0) break;
    out.cover.push_back(next);
    nearest = nearest.cwiseMin(set.distance.col(next));
  }
  std::sort(out.cover.begin(), out.cover.end());
  out.value = nearest.maxCoeff();
  return out;
}

CoverResult epsilon_ell(const DeflatedSet& set, int level) {
  if (level_cap(level) >= static_cast<std::uint64_t>(set.size()) ||
      set.size() <= kExhaustiveCoverLimit) {
    return epsilon_ell_exhaustive(set, level);
  }
  return epsilon_ell_greedy(set, level);
}

double gamma_rate(int level, long n) {
  if (n <= 0) throw InputError("sample size n must be positive");
  return (std::ldexp(1.0, level + 3) + level + 2.0) * std::numbers::ln2 / static_cast<double>(n);
}

std::vector<double> gamma_weights(const DeflatedSet& set, const ClassCoefficient& w, long n) {
  std::vector<double> weights;
  for (int level = 0; level < chain_depth(set.size()); ++level) {
    weights.push_back(w(gamma_rate(level, n)));
  }
  return weights;
}

double replay_gamma(const DeflatedSet& set, const GammaCertificate& cert) {
  double worst = 0.0;
  for (Index a = 0; a < set.size(); ++a) {
    double sum = 0.0;
    for (std::size_t level = 0; level < cert.weights.size(); ++level) {
      double nearest = kInf;
      for (Index b : cert.levels[level]) nearest = std::min(nearest, set.distance(a, b));
      sum += 2.0 * cert.weights[level] * nearest;
    }
    worst = std::max(worst, sum);
  }
  return worst;
}

void validate_gamma_certificate(const DeflatedSet& set, const GammaCertificate& cert) {
  if (cert.levels.empty() || cert.levels[0] != std::vector<Index>{0}) {
    throw InputError("gamma certificate must start with A_0 = {0}");
  }
  if (cert.weights.size() + 1 != cert.levels.size() && !(set.size() == 1 && cert.weights.empty())) {
    throw InputError("gamma certificate needs one weight per non-final level");
  }
  for (std::size_t level = 0; level < cert.levels.size(); ++level) {
    const auto& cur = cert.levels[level];
    if (static_cast<std::uint64_t>(cur.size()) > (level == 0 ? 1 : level_cap(static_cast<int>(level)))) {
      throw InputError("gamma certificate level exceeds its cardinality cap");
    }
    for (Index e : cur) {
      if (e < 0 || e >= set.size()) throw InputError("gamma certificate index out of range");
    }
    if (level > 0) {
      const auto& prev = cert.levels[level - 1];
      for (Index e : prev) {
        if (std::find(cur.begin(), cur.end(), e) == cur.end()) {
          throw InputError("gamma certificate levels are not nested");
        }
      }
    }
  }
}

GammaCertificate gamma_greedy(const DeflatedSet& set, const std::vector<double>& weights) {
  const int depth = chain_depth(set.size());
  if (static_cast<int>(weights.size()) != depth) throw InputError("one weight per level required");

  GammaCertificate cert;
  cert.weights = weights;
  cert.levels.push_back({0});
  Eigen::VectorXd nearest = set.distance.col(0);
  std::vector<Index> current{0};
  for (int level = 1; level <= depth; ++level) {
    const std::uint64_t cap = level_cap(level);
    while (static_cast<std::uint64_t>(current.size()) < cap &&
           static_cast<Index>(current.size()) < set.size()) {
      const Index next = argmax_smallest(nearest);
      if (nearest(next) <= 0.0) break;
      current.push_back(next);
      nearest = nearest.cwiseMin(set.distance.col(next));
    }
    std::vector<Index> sorted = current;
    std::sort(sorted.begin(), sorted.end());
    cert.levels.push_back(std::move(sorted));
  }
  cert.value = replay_gamma(set, cert);
  return cert;
}

GammaCertificate gamma_exhaustive(const DeflatedSet& set, const std::vector<double>& weights) {
  const Index m = set.size();
  if (m > kExhaustiveGammaLimit) throw InputError("exhaustive gamma search limited to 8 elements");
  const int depth = chain_depth(m);
  if (static_cast<int>(weights.size()) != depth) throw InputError("one weight per level required");

  const std::uint32_t full = (std::uint32_t{1} << m) - 1u;
  GammaCertificate best;
  best.value = kInf;
  best.exhaustive = true;

  GammaCertificate trial;
  trial.weights = weights;
  trial.exhaustive = true;
  std::vector<std::uint32_t> masks{1u};

  // Levels 1..depth-1 are free; level `depth` is the whole set.
  std::function<void(int)> descend = [&](int level) {
    if (level >= depth) {
      trial.levels.clear();
      for (std::uint32_t mask : masks) trial.levels.push_back(mask_to_indices(mask));
      if (depth > 0) trial.levels.push_back(mask_to_indices(full));
      trial.value = replay_gamma(set, trial);
      if (trial.value < best.value) best = trial;
      return;
    }
    const std::uint32_t prev = masks.back();
    const std::uint64_t cap = level_cap(level);
    for (std::uint32_t mask = 0; mask <= full; ++mask) {
      if ((mask & prev) != prev) continue;
      if (static_cast<std::uint64_t>(std::popcount(mask)) > cap) continue;
      masks.push_back(mask);
      descend(level + 1);
      masks.pop_back();
    }
  };
  descend(1);
  return best;
}

GammaCertificate gamma_functional(const DeflatedSet& set, const ClassCoefficient& w, long n) {
  const std::vector<double> weights = gamma_weights(set, w, n);
  GammaCertificate greedy = gamma_greedy(set, weights);
  if (set.size() <= kExhaustiveGammaLimit) {
    GammaCertificate exact = gamma_exhaustive(set, weights);
    if (exact.value < greedy.value) return exact;
  }
  return greedy;
}

ChainBoundReport theorem_main_bound(const FunctionFamily& family, const DeflationPlan& plan,
                                    long n, double r) {
  return assemble_bound(family, plan, n, r, ClassCoefficient(family));
}

ReplayValues replay_report(const FunctionFamily& family, const ChainBoundReport& report) {
  const DeflatedSet set = deflate(family, report.plan);
  validate_gamma_certificate(set, report.gamma);

  ReplayValues out;
  out.gamma = replay_gamma(set, report.gamma);
  for (std::size_t level = 0; level < report.covers.size(); ++level) {
    const auto& cover = report.covers[level].cover;
    if (static_cast<std::uint64_t>(cover.size()) > level_cap(static_cast<int>(level))) {
      throw InputError("cover certificate exceeds its cardinality cap");
    }
    out.epsilon_sum += cover_radius(set, cover);
  }
  out.total_rhs = out.gamma + 2.0 * report.w_r * out.epsilon_sum;
  for (Index i = 0; i < family.size(); ++i) {
    out.thresholds.push_back(report.w_r_plus * family.member_norm(i) + out.total_rhs);
  }
  return out;
}

double deflation_objective(const FunctionFamily& family, const ChainBoundReport& report) {
  return report.total_rhs + (report.w_r_plus - report.w_r) * family.member_norms().maxCoeff();
}

DeflationChoice optimize_deflation(const FunctionFamily& family, long n, double r,
                                   std::vector<int> k_candidates) {
  if (k_candidates.empty()) throw InputError("at least one candidate k is required");
  std::sort(k_candidates.begin(), k_candidates.end());
  k_candidates.erase(std::unique(k_candidates.begin(), k_candidates.end()), k_candidates.end());

  const ClassCoefficient w(family);
  DeflationChoice choice;
  choice.objective = kInf;
  for (int k : k_candidates) {
    ChainBoundReport rep = assemble_bound(family, build_deflation(family, k), n, r, w);
    const double objective = deflation_objective(family, rep);
    choice.candidates.emplace_back(k, objective);
    if (objective < choice.objective) {
      choice.objective = objective;
      choice.report = std::move(rep);
    }
  }
  return choice;
}

}  // namespace tailbound
