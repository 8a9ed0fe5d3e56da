#pragma once
// Batch experiment runner behind the `harqerr` executable.
//
// Each experiment reads a flat JSON object of typed keys. Defaults come
// from the experiment's parameter table, then the config file, then
// command-line flags (--some-key for key some_key). Results are a CSV table
// and a sidecar JSON report.
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace harqerr::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "HARQERR_OUT_DIR";

/// Invalid configuration; `key` names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error("config key '" + key + "': " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ParamKind { Int, UInt, Double, Bool, String, IntList, DoubleList };

struct ParamSpec {
  std::string key;
  ParamKind kind;
  Json fallback;
  std::string help;
};

struct ExperimentSpec {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;  // universal keys included
};

/// All experiments, in subcommand order.
const std::vector<ExperimentSpec>& experiments();
const ExperimentSpec& find_experiment(const std::string& name);

/// Where the effective value of each key came from.
struct ResolvedConfig {
  Json values;   // every key of the experiment, typed
  Json sources;  // key -> "default" | "config" | "flag"
};

/// Merges defaults, a config document and raw flag strings. Unknown keys,
/// type mismatches and a mismatched "experiment" raise ConfigError.
ResolvedConfig resolve_config(const ExperimentSpec& spec, const Json& file,
                              const std::vector<std::pair<std::string, std::string>>& flags);

/// Reads a JSON config file; parse failures are ConfigError("config", ...)
/// and unreadable files IoError.
Json load_config_file(const std::filesystem::path& path);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Shortest round-trip decimal representation.
std::string format_number(double value);
std::string to_csv(const Table& table);

struct ExperimentResult {
  Table table;
  Json summary = Json::object();
  Json linear_inputs = Json::object();  // every dB input, converted once
};

/// Validates the experiment-specific ranges and runs it. `log` receives
/// progress lines (may be null).
ExperimentResult run_experiment(const std::string& name, const Json& config, std::ostream* log);

struct OutputPaths {
  std::filesystem::path csv;
  std::filesystem::path report;
};

/// `out` when given; otherwise $HARQERR_OUT_DIR (or the working directory)
/// joined with "<experiment>.csv". The report is "<stem>.report.json" next
/// to the CSV.
OutputPaths resolve_outputs(const std::string& experiment, const std::string& out);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace harqerr::cli
