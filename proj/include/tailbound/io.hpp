#pragma once

#include "tailbound/chaining.hpp"
#include "tailbound/gaussian.hpp"
#include "tailbound/orlicz.hpp"
#include "tailbound/verify.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace tailbound::io {

using Json = nlohmann::ordered_json;

// Reads a JSON document from a path; "-" reads stdin. Throws InputError.
Json read_json_file(const std::string& path);
// Parses inline JSON, or reads a file when the text starts with '@'.
Json parse_json_arg(const std::string& text);

DiscreteDistribution parse_distribution(const Json& doc);
// Family document: support, probabilities, functions (in file order) and an
// optional "norm" ("cgf" or a generator object).
FunctionFamily parse_family(const Json& doc);
OrliczGenerator parse_generator(const Json& doc);
Json generator_to_json(const OrliczGenerator& gen);
// {"covariance": [[...]]} or {"spectrum": "poly", "exponent": a, "d": d} or
// {"spectrum": [values...]}.
GaussianModel parse_gaussian(const Json& doc);

// Shortest round-trip decimal with at most 17 significant digits.
std::string format_double(double value);

Json to_json(const GaussianBoundReport& report);
Json to_json(const FunctionFamily& family, const DeflationPlan& plan);
Json to_json(const FunctionFamily& family, const ChainBoundReport& report);
Json to_json(const VerificationReport& report);

// Reads back the plan and certificate part of a chain-bound report.
ChainBoundReport chain_report_from_json(const Json& doc);

inline constexpr const char* kReportCsvHeader =
    "target,n,r,k,trials,violations,rate,guarantee,stderr,pass";
std::string to_csv_row(const VerificationReport& report);
std::string to_csv(const std::vector<VerificationReport>& reports);

}  // namespace tailbound::io
