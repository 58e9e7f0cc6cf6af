#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "trapscope/landscape.hpp"

namespace trapscope {

/// Run configuration read from a flat `key = value` file. '#' starts a
/// comment; lists are comma separated; reals may be written as `x`, `pi`,
/// `x*pi` or `x pi`.
struct RunConfig {
  int levels = 0;
  double a = 0.0;
  double b = 0.0;
  std::vector<double> couplings;
  double horizon = 0.0;
  std::vector<double> lambda;
  int segments = 64;
  int substeps = 0;
  int directions = 8;
  std::uint64_t seed = 1;
  int witness_budget = 500;
  std::vector<double> witness_horizons;  // empty: {T, 2T}
  std::string out = "report.json";
  CertificateTolerances tolerances;

  /// Builds the validated instance (model errors propagate).
  [[nodiscard]] ProblemInstance instance(bool theorem_mode) const;
  [[nodiscard]] CertificateConfig certificate_config(int threads) const;
};

/// Throws ParseError with a line number on malformed input, unknown or
/// repeated keys, missing required keys, or violated RunConfig invariants.
RunConfig parse_config(std::string_view text);
RunConfig read_config_file(const std::filesystem::path& path);

/// Parses TRAPSCOPE_THREADS; 0 when unset. Throws ParseError on bad values.
int threads_from_environment();

/// Structured certificate, schema "trapscope/1".
nlohmann::ordered_json report_to_json(const TrapReport& report);
/// Human-readable page derived from the JSON document.
std::string report_summary(const nlohmann::ordered_json& doc);

/// Entry point shared by the executable and the tests. Exit codes: 0 pass,
/// 1 usage or input error, 2 check failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int cmd_certify(const std::filesystem::path& config_path, const std::string& out_override, std::ostream& out,
                std::ostream& err);
int cmd_differential(const std::filesystem::path& config_path, const std::filesystem::path& control_path, int order,
                     const std::string& csv_path, std::ostream& out, std::ostream& err);
int cmd_scan(const std::filesystem::path& config_path, const std::filesystem::path& out_csv, double tmax, int points,
             std::ostream& out, std::ostream& err);
int cmd_controllability(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

}  // namespace trapscope
