#pragma once

// Batch front end: resolves inputs, runs check suites and renders reports.
// The executable in tools/ is a thin wrapper around run().

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace hmc::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Residual classes with their pinned defaults; --tol class=value overrides.
std::map<std::string, double> default_tolerances();

struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::string suite = "all";  // identities: lemma15 | oneill | prop23 | all
  int samples = 50;
  std::uint64_t seed = 42;
  std::map<std::string, double> tol = default_tolerances();
  std::string format = "json";
  std::string out;
  int threads = 0;
};

/// One check outcome. `detail` names the sample point and frame of the
/// worst residual so that failures can be replayed.
struct Record {
  std::string subject;
  std::string check;
  std::string anchor;
  nlohmann::json residuals = nlohmann::json::object();
  double tolerance = 0.0;
  bool pass = false;
  nlohmann::json detail = nlohmann::json::object();
};

nlohmann::json to_json(const Record& r);

/// Exit codes: 0 all checks pass, 1 some check failed, 2 usage or input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Report for an already-parsed configuration (no file output).
nlohmann::json make_report(const RunConfig& cfg);

std::string render_text(const nlohmann::json& report);

}  // namespace hmc::cli
