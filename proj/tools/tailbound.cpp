// tailbound: command-line front end for the tail-bound library.
//
// Exit status: 0 on success, 2 when an input violates a precondition, 1 when
// the numerics fail (bracketing exhaustion, quadrature non-convergence).

#include "tailbound/chaining.hpp"
#include "tailbound/gaussian.hpp"
#include "tailbound/io.hpp"
#include "tailbound/orlicz.hpp"
#include "tailbound/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace tb = tailbound;
using tb::io::Json;

namespace {

struct Output {
  std::string format;
  std::string path;

  void emit(const std::string& text) const {
    if (path.empty() || path == "-") {
      std::cout << text;
      return;
    }
    std::ofstream out(path);
    if (!out) throw tb::InputError("cannot write '" + path + "'");
    out << text;
  }

  // A single record: JSON object, or a header line plus one CSV row.
  void record(const Json& obj) const {
    if (format == "json") {
      emit(obj.dump(2) + "\n");
      return;
    }
    std::string header, row;
    for (const auto& [key, value] : obj.items()) {
      header += (header.empty() ? "" : ",") + key;
      std::string cell;
      if (value.is_number_float()) {
        cell = tb::io::format_double(value.get<double>());
      } else if (value.is_string()) {
        cell = value.get<std::string>();
      } else {
        cell = value.dump();
      }
      row += (row.empty() ? "" : ",") + cell;
    }
    emit(header + "\n" + row + "\n");
  }

  void reports(const std::vector<tb::VerificationReport>& reps) const {
    if (format == "csv") {
      emit(tb::io::to_csv(reps));
      return;
    }
    Json arr = Json::array();
    for (const auto& rep : reps) arr.push_back(tb::io::to_json(rep));
    emit((reps.size() == 1 ? arr[0] : arr).dump(2) + "\n");
  }
};

// verify and sweep default to CSV, everything else to JSON.
void add_output_options(CLI::App* cmd, Output& out, const std::string& default_format) {
  cmd->add_option("--format", out.format, "Output format (default " + default_format + ")")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("-o,--output", out.path, "Write the result to this file instead of stdout");
}

tb::Index member_or_default(const tb::FunctionFamily& family, const std::string& name) {
  if (!name.empty()) return family.find(name);
  return family.size() > 1 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instance-dependent tail bounds for empirical processes over finite families"};
  app.require_subcommand(1);

  Output out;
  std::string dist_path, family_path, model_path, gen_text, fname, gname, target_text, u_text;
  double r = 0.0;
  double M = 0.0;
  long n = 0;
  int k = -1;
  long trials = 10000;
  std::uint64_t seed = 0;
  std::size_t mesh = 1000;
  bool loose = false;
  std::vector<int> k_candidates;
  std::vector<long> n_grid;
  std::vector<double> r_grid;
  std::vector<int> k_grid;
  std::optional<double> threshold;

  auto* trf = app.add_subcommand("trf", "T_r(f) of one tabulated function");
  trf->add_option("--dist,--family", dist_path, "Distribution/family JSON")->required();
  trf->add_option("--f", fname, "Function name")->required();
  trf->add_option("--r", r, "Rate r >= 0")->required();
  add_output_options(trf, out, "json");

  auto* cwr = app.add_subcommand("class-wr", "Class coefficient w_r over F - F");
  cwr->add_option("--family", family_path, "Family JSON")->required();
  cwr->add_option("--r", r, "Rate r >= 0")->required();
  add_output_options(cwr, out, "json");

  auto* onorm = app.add_subcommand("orlicz-norm", "Orlicz norm of a tabulated function");
  onorm->add_option("--dist,--family", dist_path, "Distribution/family JSON")->required();
  onorm->add_option("--f", fname, "Function name")->required();
  onorm->add_option("--gen", gen_text, "Generator JSON (inline or @file)")->required();
  add_output_options(onorm, out, "json");

  auto* wquad = app.add_subcommand("wr-quad", "Quadrature bound on w_r for an Orlicz norm");
  wquad->add_option("--gen", gen_text, "Generator JSON (inline or @file)")->required();
  wquad->add_option("--r", r, "Rate r >= 0")->required();
  add_output_options(wquad, out, "json");

  auto* wexp = app.add_subcommand("wr-exp", "Closed-form w_r bound for exponential-type norms");
  wexp->add_option("--gen", gen_text, "Generator JSON (inline or @file)")->required();
  wexp->add_option("--r", r, "Rate r >= 0")->required();
  auto* m_opt = wexp->add_option("--M", M, "Conversion factor (default: closed form, else numeric)");
  add_output_options(wexp, out, "json");

  auto* gbound = app.add_subcommand("gaussian-bound", "Rank-k bound for linear functionals of a Gaussian");
  gbound->add_option("--model", model_path, "Covariance JSON")->required();
  gbound->add_option("--n", n, "Sample size")->required();
  gbound->add_option("--r", r, "Rate r > 0")->required();
  gbound->add_option("--k", k, "Truncation rank (default: optimal rank)");
  gbound->add_option("--u", u_text, "Direction as a JSON array (default: top eigenvector)");
  gbound->add_flag("--loose-projected", loose, "Use (u^T Sigma u)^{1/2} in the projected term");
  add_output_options(gbound, out, "json");

  auto* chain = app.add_subcommand("chain-bound", "Deflated chaining bound for a finite family");
  chain->add_option("--family", family_path, "Family JSON")->required();
  chain->add_option("--n", n, "Sample size")->required();
  chain->add_option("--r", r, "Rate r > 0")->required();
  chain->add_option("--k", k, "Deflation budget (0 = no deflation)")->required();
  add_output_options(chain, out, "json");

  auto* opt = app.add_subcommand("optimize", "Choose the deflation budget k");
  opt->add_option("--family", family_path, "Family JSON")->required();
  opt->add_option("--n", n, "Sample size")->required();
  opt->add_option("--r", r, "Rate r > 0")->required();
  opt->add_option("--k-candidates", k_candidates, "Candidate budgets")->delimiter(',')->required();
  add_output_options(opt, out, "json");

  auto add_trial_options = [&](CLI::App* cmd) {
    cmd->add_option("--target", target_text, "chernoff | corollary | gaussian | theorem-main")->required();
    cmd->add_option("--family,--dist", family_path, "Family JSON (discrete targets)");
    cmd->add_option("--model", model_path, "Covariance JSON (gaussian target)");
    cmd->add_option("--f", fname, "Tracked member (chernoff) or minuend (corollary)");
    cmd->add_option("--g", gname, "Subtrahend for the corollary target (default: 0)");
    cmd->add_option("--trials", trials, "Number of trials")->capture_default_str();
    cmd->add_option("--seed", seed, "Root seed")->capture_default_str();
    cmd->add_option("--mesh", mesh, "Direction mesh size (gaussian)")->capture_default_str();
    cmd->add_flag("--loose-projected", loose, "Gaussian: use the full quadratic form");
    cmd->add_option("--threshold", threshold, "Override every threshold (diagnostics)");
  };

  auto* verify = app.add_subcommand("verify", "Monte Carlo check of one guarantee");
  add_trial_options(verify);
  verify->add_option("--n", n, "Sample size")->required();
  verify->add_option("--r", r, "Rate r > 0")->required();
  verify->add_option("--k", k, "Deflation budget or Gaussian rank (default: 0 / optimal)");
  add_output_options(verify, out, "csv");

  auto* sw = app.add_subcommand("sweep", "Monte Carlo checks over an (n, r, k) grid");
  add_trial_options(sw);
  sw->add_option("--n-grid", n_grid, "Sample sizes")->delimiter(',')->required();
  sw->add_option("--r-grid", r_grid, "Rates")->delimiter(',')->required();
  sw->add_option("--k-grid", k_grid, "Budgets/ranks")->delimiter(',');
  add_output_options(sw, out, "csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (out.format.empty()) out.format = (*verify || *sw) ? "csv" : "json";

  try {
    if (*trf) {
      const tb::FunctionFamily family = tb::io::parse_family(tb::io::read_json_file(dist_path));
      const tb::Index i = family.find(fname);
      const auto oracle =
          tb::cgf_discrete(family.distribution(), tb::TabulatedFunction{family.member(i)});
      out.record(Json{{"function", fname}, {"r", r}, {"T_r", tb::rate_bound_T(oracle, r)}});
    } else if (*cwr) {
      const tb::FunctionFamily family = tb::io::parse_family(tb::io::read_json_file(family_path));
      out.record(Json{{"norm", family.norm().name()}, {"r", r}, {"w_r", tb::class_wr(family, r)}});
    } else if (*onorm) {
      const tb::FunctionFamily family = tb::io::parse_family(tb::io::read_json_file(dist_path));
      const tb::OrliczGenerator gen = tb::io::parse_generator(tb::io::parse_json_arg(gen_text));
      const tb::Index i = family.find(fname);
      const double value =
          tb::orlicz_norm(family.distribution(), tb::TabulatedFunction{family.member(i)}, gen);
      out.record(Json{{"function", fname}, {"generator", gen.name()}, {"norm", value}});
    } else if (*wquad) {
      const tb::OrliczGenerator gen = tb::io::parse_generator(tb::io::parse_json_arg(gen_text));
      out.record(Json{{"generator", gen.name()}, {"r", r}, {"w_r_bound", tb::wr_quadrature_bound(gen, r)}});
    } else if (*wexp) {
      const tb::OrliczGenerator gen = tb::io::parse_generator(tb::io::parse_json_arg(gen_text));
      std::string source = "given";
      if (m_opt->count() == 0) {
        if (const auto closed = tb::closed_form_conversion_factor(gen)) {
          M = *closed;
          source = "closed-form";
        } else {
          M = tb::conversion_factor_M(gen);
          source = "numeric";
        }
      }
      out.record(Json{{"generator", gen.name()},
                      {"r", r},
                      {"M", M},
                      {"M_source", source},
                      {"w_r_bound", tb::wr_exponential_type(gen, M, r)}});
    } else if (*gbound) {
      const tb::GaussianModel model = tb::io::parse_gaussian(tb::io::read_json_file(model_path));
      Eigen::VectorXd u = model.eigenvectors().col(0);
      if (!u_text.empty()) {
        const auto values = tb::io::parse_json_arg(u_text).get<std::vector<double>>();
        u = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
      }
      const bool auto_rank = k < 0;
      const Eigen::Index rank = auto_rank ? tb::optimal_rank(model, n, r) : k;
      const auto rep = tb::gaussian_instance_bound(
          model, tb::LinearFunctional(u), rank, n, r,
          loose ? tb::ProjectedTerm::Full : tb::ProjectedTerm::Truncated);
      Json obj = tb::io::to_json(rep);
      obj["k_source"] = auto_rank ? "optimal" : "given";
      out.record(obj);
    } else if (*chain) {
      const tb::FunctionFamily family = tb::io::parse_family(tb::io::read_json_file(family_path));
      const auto rep = tb::theorem_main_bound(family, tb::build_deflation(family, k), n, r);
      out.emit(tb::io::to_json(family, rep).dump(2) + "\n");
    } else if (*opt) {
      const tb::FunctionFamily family = tb::io::parse_family(tb::io::read_json_file(family_path));
      const auto choice = tb::optimize_deflation(family, n, r, k_candidates);
      Json cands = Json::array();
      for (const auto& [kc, obj] : choice.candidates) cands.push_back(Json{{"k", kc}, {"objective", obj}});
      Json doc{{"objective", choice.objective},
               {"candidates", cands},
               {"report", tb::io::to_json(family, choice.report)}};
      out.emit(doc.dump(2) + "\n");
    } else if (*verify || *sw) {
      tb::TrialPlan plan;
      plan.target = tb::parse_target(target_text);
      plan.n = std::max(n, 1L);
      plan.r = r;
      plan.trials = trials;
      plan.root_seed = seed;

      std::optional<tb::FunctionFamily> family;
      std::optional<tb::GaussianModel> model;
      tb::TrialInputs inputs;
      inputs.mesh_size = mesh;
      inputs.projected = loose ? tb::ProjectedTerm::Full : tb::ProjectedTerm::Truncated;
      inputs.threshold_override = threshold;
      if (plan.target == tb::Target::Gaussian) {
        if (model_path.empty()) throw tb::InputError("--model is required for the gaussian target");
        model.emplace(tb::io::parse_gaussian(tb::io::read_json_file(model_path)));
        inputs.gaussian = &*model;
      } else {
        if (family_path.empty()) throw tb::InputError("--family is required for this target");
        family.emplace(tb::io::parse_family(tb::io::read_json_file(family_path)));
        inputs.family = &*family;
        inputs.member = member_or_default(*family, fname);
        if (!gname.empty()) inputs.subtrahend = family->find(gname);
      }
      const int default_k = plan.target == tb::Target::Gaussian ? -1 : 0;
      if (*verify) {
        plan.k = k >= 0 ? k : default_k;
        out.reports({tb::run_trials(plan, inputs)});
      } else {
        tb::SweepGrid grid{n_grid, r_grid, k_grid.empty() ? std::vector<int>{default_k} : k_grid};
        out.reports(tb::sweep(plan, grid, inputs));
      }
    }
  } catch (const tb::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const tb::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
