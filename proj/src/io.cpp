#include "tailbound/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace tailbound::io {

namespace {

template <typename T>
T get_field(const Json& doc, const char* key, const char* context) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw InputError(std::string(context) + " is missing field '" + key + "'");
  }
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string(context) + " field '" + key + "' has the wrong type: " + e.what());
  }
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows, const char* what) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw InputError(std::string(what) + " rows must have equal length");
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(v > 0 ? "inf" : "-inf"); }

}  // namespace

Json read_json_file(const std::string& path) {
  try {
    if (path == "-") return Json::parse(std::cin);
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

Json parse_json_arg(const std::string& text) {
  if (!text.empty() && text.front() == '@') return read_json_file(text.substr(1));
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("argument is not valid JSON: " + std::string(e.what()));
  }
}

DiscreteDistribution parse_distribution(const Json& doc) {
  const auto support = get_field<std::vector<std::vector<double>>>(doc, "support", "distribution");
  const auto probs = get_field<std::vector<double>>(doc, "probabilities", "distribution");
  return DiscreteDistribution(to_matrix(support, "support"), to_vector(probs));
}

FunctionFamily parse_family(const Json& doc) {
  DiscreteDistribution dist = parse_distribution(doc);
  if (!doc.contains("functions") || !doc.at("functions").is_object()) {
    throw InputError("family document needs a 'functions' object");
  }
  std::vector<std::string> names;
  std::vector<TabulatedFunction> members;
  for (const auto& [name, values] : doc.at("functions").items()) {
    if (!values.is_array()) throw InputError("function '" + name + "' must be an array");
    names.push_back(name);
    members.push_back({to_vector(values.get<std::vector<double>>())});
  }
  FunctionNorm norm = FunctionNorm::cgf();
  if (doc.contains("norm")) {
    const Json& spec = doc.at("norm");
    if (spec.is_string() && spec.get<std::string>() == "cgf") {
      norm = FunctionNorm::cgf();
    } else if (spec.is_object()) {
      norm = FunctionNorm::orlicz(parse_generator(spec));
    } else {
      throw InputError("'norm' must be \"cgf\" or a generator object");
    }
  }
  return FunctionFamily(std::move(dist), std::move(names), std::move(members), std::move(norm));
}

OrliczGenerator parse_generator(const Json& doc) {
  const auto kind = get_field<std::string>(doc, "kind", "generator");
  if (kind == "sub-gaussian") return OrliczGenerator::sub_gaussian();
  if (kind == "sub-exponential") return OrliczGenerator::sub_exponential();
  if (kind == "bernstein") return OrliczGenerator::bernstein(get_field<double>(doc, "L", "generator"));
  if (kind == "bennett") return OrliczGenerator::bennett(get_field<double>(doc, "L", "generator"));
  if (kind == "power") return OrliczGenerator::power(get_field<double>(doc, "p", "generator"));
  if (kind == "custom") {
    return OrliczGenerator::custom(get_field<std::vector<double>>(doc, "t", "generator"),
                                   get_field<std::vector<double>>(doc, "phi", "generator"));
  }
  throw InputError("unknown generator kind '" + kind + "'");
}

Json generator_to_json(const OrliczGenerator& gen) {
  Json out{{"kind", gen.name()}};
  switch (gen.kind()) {
    case GeneratorKind::Bernstein:
    case GeneratorKind::Bennett: out["L"] = gen.parameter(); break;
    case GeneratorKind::Power: out["p"] = gen.parameter(); break;
    case GeneratorKind::Custom:
      out["t"] = std::vector<double>(gen.knots().begin() + 1, gen.knots().end());
      out["phi"] = std::vector<double>(gen.knot_values().begin() + 1, gen.knot_values().end());
      break;
    default: break;
  }
  return out;
}

GaussianModel parse_gaussian(const Json& doc) {
  if (doc.contains("covariance")) {
    return GaussianModel(
        to_matrix(get_field<std::vector<std::vector<double>>>(doc, "covariance", "model"), "covariance"));
  }
  if (!doc.contains("spectrum")) throw InputError("model needs 'covariance' or 'spectrum'");
  const Json& spec = doc.at("spectrum");
  if (spec.is_array()) return GaussianModel::from_spectrum(to_vector(spec.get<std::vector<double>>()));
  if (spec.is_string() && spec.get<std::string>() == "poly") {
    const double exponent = get_field<double>(doc, "exponent", "model");
    const long d = get_field<long>(doc, "d", "model");
    if (d < 1) throw InputError("model dimension d must be >= 1");
    Eigen::VectorXd values(d);
    for (long j = 0; j < d; ++j) values(j) = std::pow(static_cast<double>(j + 1), -exponent);
    return GaussianModel::from_spectrum(values);
  }
  throw InputError("'spectrum' must be \"poly\" or an array of eigenvalues");
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

Json to_json(const GaussianBoundReport& report) {
  return Json{{"k", report.k},
              {"n", report.n},
              {"r", report.r},
              {"tail_trace", report.tail_trace},
              {"tail_op", report.tail_op},
              {"projected", report.projected},
              {"base", report.base},
              {"total", report.total},
              {"probability_level", report.probability_level},
              {"projected_term",
               report.projected_term == ProjectedTerm::Truncated ? "truncated" : "full"}};
}

Json to_json(const FunctionFamily& family, const DeflationPlan& plan) {
  Json assignment = Json::object();
  for (Index i = 0; i < family.size(); ++i) {
    assignment[family.name(i)] = family.name(plan.assignment[static_cast<std::size_t>(i)]);
  }
  std::vector<Index> centers(plan.assignment.begin(), plan.assignment.end());
  std::sort(centers.begin(), centers.end());
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
  Json center_names = Json::array();
  for (Index c : centers) center_names.push_back(family.name(c));
  return Json{{"k", plan.k},
              {"assignment", assignment},
              {"assignment_index", plan.assignment},
              {"centers", center_names}};
}

Json to_json(const FunctionFamily& family, const ChainBoundReport& report) {
  Json rates = Json::array();
  for (std::size_t l = 0; l < report.gamma.weights.size(); ++l) {
    rates.push_back(gamma_rate(static_cast<int>(l), report.n));
  }
  Json covers = Json::array();
  for (std::size_t l = 0; l < report.covers.size(); ++l) {
    covers.push_back(Json{{"level", l},
                          {"value", report.covers[l].value},
                          {"cover", report.covers[l].cover},
                          {"exhaustive", report.covers[l].exhaustive}});
  }
  Json members = Json::array();
  for (Index i = 0; i < family.size(); ++i) {
    members.push_back(Json{{"name", family.name(i)},
                           {"norm", family.member_norm(i)},
                           {"threshold", report.thresholds[static_cast<std::size_t>(i)]}});
  }
  return Json{{"n", report.n},
              {"r", report.r},
              {"k", report.plan.k},
              {"norm", family.norm().name()},
              {"probability_level", report.probability_level},
              {"w_r", number(report.w_r)},
              {"w_r_plus", number(report.w_r_plus)},
              {"gamma",
               Json{{"value", report.gamma.value},
                    {"exhaustive", report.gamma.exhaustive},
                    {"levels", report.gamma.levels},
                    {"weights", report.gamma.weights},
                    {"rates", rates}}},
              {"epsilon", Json{{"sum", report.epsilon_sum}, {"levels", covers}}},
              {"total_rhs", report.total_rhs},
              {"plan", to_json(family, report.plan)},
              {"members", members}};
}

ChainBoundReport chain_report_from_json(const Json& doc) {
  ChainBoundReport rep;
  try {
    rep.n = doc.at("n").get<long>();
    rep.r = doc.at("r").get<double>();
    rep.w_r = doc.at("w_r").get<double>();
    rep.w_r_plus = doc.at("w_r_plus").get<double>();
    rep.plan.k = doc.at("plan").at("k").get<int>();
    rep.plan.assignment = doc.at("plan").at("assignment_index").get<std::vector<Index>>();
    const Json& g = doc.at("gamma");
    rep.gamma.value = g.at("value").get<double>();
    rep.gamma.exhaustive = g.at("exhaustive").get<bool>();
    rep.gamma.levels = g.at("levels").get<std::vector<std::vector<Index>>>();
    rep.gamma.weights = g.at("weights").get<std::vector<double>>();
    for (const Json& c : doc.at("epsilon").at("levels")) {
      rep.covers.push_back({c.at("value").get<double>(), c.at("cover").get<std::vector<Index>>(),
                            c.at("exhaustive").get<bool>()});
    }
    rep.epsilon_sum = doc.at("epsilon").at("sum").get<double>();
    rep.total_rhs = doc.at("total_rhs").get<double>();
    for (const Json& m : doc.at("members")) rep.thresholds.push_back(m.at("threshold").get<double>());
    rep.probability_level = doc.at("probability_level").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed chain-bound report: ") + e.what());
  }
  return rep;
}

Json to_json(const VerificationReport& report) {
  return Json{{"target", target_name(report.target)},
              {"n", report.n},
              {"r", report.r},
              {"k", report.k},
              {"trials", report.trials},
              {"violations", report.violations},
              {"rate", report.rate},
              {"guarantee", report.guarantee},
              {"stderr", report.stderr_},
              {"pass", report.pass}};
}

std::string to_csv_row(const VerificationReport& report) {
  std::ostringstream os;
  os << target_name(report.target) << ',' << report.n << ',' << format_double(report.r) << ','
     << report.k << ',' << report.trials << ',' << report.violations << ','
     << format_double(report.rate) << ',' << format_double(report.guarantee) << ','
     << format_double(report.stderr_) << ',' << (report.pass ? "true" : "false");
  return os.str();
}

std::string to_csv(const std::vector<VerificationReport>& reports) {
  std::string out = std::string(kReportCsvHeader) + "\n";
  for (const auto& rep : reports) out += to_csv_row(rep) + "\n";
  return out;
}

}  // namespace tailbound::io
