#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hadwiger/covering.hpp"

namespace hadwiger {

using ojson = nlohmann::ordered_json;

inline constexpr int kConfigVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

enum class OutputFormat { Json, Csv };
std::optional<OutputFormat> parse_format(const std::string& name);
std::string to_string(OutputFormat format);

// Parse and validation errors. The message starts with the JSON path of the
// offending entry, e.g. "bodies[1].kind: ...".
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct NamedBody {
  std::string name;
  nlohmann::json spec;
  int dim = 0;
};

struct RunSpec {
  std::string id;
  std::string experiment;  // delta-kb | psi2 | gluskin | witness | cover | report
  std::vector<std::string> bodies;
  nlohmann::json params;  // validated, defaults filled in
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::uint64_t samples = 1'000'000;
  std::string output_dir = "results";
  OutputFormat format = OutputFormat::Json;
  std::vector<NamedBody> bodies;
  std::vector<RunSpec> experiments;
};

const std::vector<std::string>& experiment_names();

// Validates everything, including each run's parameters against the
// preconditions of its operation, before any computation. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& config);
ExperimentConfig load_config(const std::string& path);

// Validates and fills defaults of one run's parameters; `path` prefixes
// error messages.
nlohmann::json validate_run_params(const std::string& experiment, const nlohmann::json& params,
                                   const std::vector<int>& body_dims, const ExperimentConfig& config,
                                   const std::string& path);

struct RunResult {
  std::string id;
  std::string experiment;
  bool completed = false;  // false when the run threw
  bool invariants_ok = false;
  std::string error;
  ojson payload;                 // deterministic: no timestamps
  std::vector<ojson> rows;       // flat table rows
  double wall_seconds = 0.0;
};

// Runs one experiment on every listed body. Exceptions are caught and
// reported in the result.
RunResult execute_run(const RunSpec& run, const ExperimentConfig& config);

struct ConfigOutcome {
  std::vector<RunResult> runs;
  bool invariant_failure = false;
};

// Executes the runs in order. With write_files, writes <dir>/<id>.json per
// run, the table, and manifest.json; each file is written atomically.
ConfigOutcome run_config(const ExperimentConfig& config, bool write_files = true);

// Exit status: 0 when every run completed with all invariants holding, 1
// otherwise.
int exit_status(const ConfigOutcome& outcome);

// Flat table. Columns follow a fixed documented order; numbers use 6
// significant digits.
std::string emit_table(const std::vector<ojson>& rows, OutputFormat format);
const std::vector<std::string>& table_columns();
std::string format_number(double value);

void write_file_atomic(const std::string& path, const std::string& contents);

// Certificates as JSON, with the body spec embedded so `verify` can rebuild it.
ojson certificate_to_json(const CoveringCertificate& cert, const nlohmann::json& body_spec);
CoveringCertificate certificate_from_json(const nlohmann::json& json);

}  // namespace hadwiger
