#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qglab/graph.hpp"

namespace qglab::tools {

/// Malformed or inconsistent configuration (suite exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailedChecks = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

struct GraphSpec {
  std::string generator = "lattice";  ///< star | lattice | tree | file
  int rays = 3;
  double ray_length = 1.0;
  int dimension = 1;
  int side = 10;
  double length_lo = 1.0;
  double length_hi = 1.0;
  std::uint64_t length_seed = 0;  ///< random lattice lengths, independent of the suite seed
  int branching = 2;
  int depth = 3;
  double edge_length = 1.0;
  std::string path;  ///< graph JSON for generator = "file", resolved against the config directory
};

/// Throws ConfigError for bad generator parameters or unreadable files.
MetricGraph build_graph(const GraphSpec& spec);

struct CheckSpec {
  std::string name;
  std::string kind;
  bool asserted = true;
  nlohmann::json params = nlohmann::json::object();  ///< remaining keys of the check table
};

struct SuiteConfig {
  std::string name = "suite";
  GraphSpec graph;
  double h = 0.05;
  double dt = 1e-3;
  double theta = 0.5;
  double margin_tolerance = 1e-10;
  std::uint64_t seed = 0;
  std::vector<CheckSpec> checks;
  std::string output_dir = ".";
  std::string hash;  ///< FNV-1a of the canonical (sorted-key JSON) form of the parsed config
};

/// Parses the TOML text of a suite. `base_dir` resolves relative graph paths.
SuiteConfig parse_suite_config(std::string_view toml_text, const std::string& base_dir = ".");
SuiteConfig load_suite_config(const std::string& path);

/// Names accepted in `kind = ...`.
const std::vector<std::string>& check_kinds();

struct CheckContext {
  std::shared_ptr<const MetricGraph> graph;
  double h = 0.05;
  double dt = 1e-3;
  double theta = 0.5;
  double margin_tolerance = 1e-10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct CheckOutput {
  std::vector<nlohmann::json> rows;
  /// (file suffix, CSV text) pairs; the suite writes <suite>.<check><suffix>.
  std::vector<std::pair<std::string, std::string>> tables;
  bool pass = true;
  std::string summary;
};

using CheckRunner = std::function<CheckOutput()>;

/// Validates every parameter of a check against the graph and returns a
/// runner. Throws ConfigError on unknown kinds, unknown or mistyped keys
/// and unparsable points.
CheckRunner prepare_check(const CheckSpec& check, const CheckContext& context);

struct CheckResult {
  std::string name;
  std::string kind;
  bool asserted = true;
  bool pass = false;
  bool failed_to_run = false;
  std::string summary;
};

struct SuiteResult {
  int exit_code = kExitOk;
  std::vector<CheckResult> checks;
  std::string report_path;
  std::string error;
};

struct RunOptions {
  unsigned threads = 1;
  std::string output_dir;  ///< overrides the config's output directory when nonempty
};

/// Runs the checks (concurrently when threads > 1), then writes rows in
/// declared order to <dir>/<name>.jsonl, tables to <dir>/<name>.<check>*.csv
/// and run metadata (with a timestamp) to <dir>/<name>.meta.json. Exit
/// status: 0 if every asserted check passes, 1 otherwise, 2 for
/// configuration errors, 3 if a check throws (rows of earlier checks kept).
SuiteResult run_suite(const SuiteConfig& config, const RunOptions& options);

void print_summary(std::ostream& out, const SuiteResult& result);

}  // namespace qglab::tools
