#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "afrelay/metrics.hpp"
#include "afrelay/spectral_laws.hpp"

namespace afrelay {

inline constexpr const char* kToolName = "afrelay";
const char* tool_version();

// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumeric = 3, kExitValidation = 4 };

// Everything a command needs. Field names double as JSON keys; flags use the
// same names with '-' for '_'.
struct Config {
  std::string command;
  int K = 10;
  int M = 0;  // 0: same as K
  double mu_db = 10.0;
  double nu_db = 10.0;
  double zeta2_db = 20.0;
  double alpha = 0.5;
  std::string model = "tsl";
  int trials = -1;  // -1: command default
  std::uint64_t seed = 42;
  std::string out_dir = ".";
  bool bits = false;
  bool quick = false;
  bool as_printed_transforms = false;

  // sweep / compare
  std::string axis = "zeta2_db";
  std::optional<double> start, stop, step;
  std::string zeta2_scale = "power";  // power | amplitude

  int bins = 40;
  unsigned workers = 0;  // not part of the output, never changes results

  int resolved_M() const { return M > 0 ? M : K; }
  SystemParams system() const;
  Zeta2DbScale scale() const;
  // model with the current zeta2_db / alpha
  SecondHopModel second_hop() const;
  void validate() const;  // throws ConfigError
};

nlohmann::json to_json(const Config& c);
// Reads keys present in j over the values already in c. A manifest is
// accepted too: its "config" member is used.
void merge_json(Config& c, const nlohmann::json& j);
Config load_config_file(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct OutputFile {
  std::string name;
  std::string sha256;
  std::uint64_t bytes = 0;
};

struct RunManifest {
  std::string tool = kToolName;
  std::string version;
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  double wall_clock_s = 0.0;
  std::string started_utc;
  std::vector<OutputFile> outputs;
  nlohmann::json summary;
};

nlohmann::json to_json(const RunManifest& m);

struct CommandResult {
  int exit_code = kExitOk;
  RunManifest manifest;
};

// Each command resolves defaults, writes its CSVs plus manifest.json into
// out_dir and returns the manifest. Errors surface as ConfigError /
// NumericError, except validate, which reports through exit_code.
CommandResult cmd_aepdf(const Config& c);
CommandResult cmd_sweep(const Config& c);
CommandResult cmd_compare(const Config& c);
CommandResult cmd_validate(const Config& c);

// Dispatch on c.command, translate exceptions into exit codes, print a short
// summary to `log`.
int run_command(const Config& c, std::ostream& log);

// ---------------------------------------------------------------- validation

struct CheckResult {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ValidationOptions {
  bool quick = false;
  bool as_printed_transforms = false;
  std::uint64_t seed = 42;
  unsigned workers = 0;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  std::vector<std::string> failed() const;
};

ValidationReport run_validation(const ValidationOptions& opt);
nlohmann::json to_json(const ValidationReport& r);

// CSV number formatting: shortest round-trip representation.
std::string fmt(double v);

}  // namespace afrelay
