#include "suite.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "output.hpp"
#include "qglab/geometry.hpp"
#include "qglab/heat.hpp"
#include "qglab/report.hpp"

namespace qglab::tools {

namespace {

struct Slot {
  CheckOutput output;
  bool ran = false;
  std::string error;
  bool solver_failure = false;
};

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

SuiteResult run_suite(const SuiteConfig& config, const RunOptions& options) {
  SuiteResult result;
  const unsigned threads = std::max(1u, options.threads);

  // Everything that can be rejected is rejected before any file is touched.
  std::vector<CheckRunner> runners;
  CheckContext ctx;
  try {
    ctx.graph = std::make_shared<const MetricGraph>(build_graph(config.graph));
    const ValidationReport valid = validate(*ctx.graph);
    if (!valid.ok()) throw ConfigError("graph: " + valid.violations.front());
    ctx.h = config.h;
    ctx.dt = config.dt;
    ctx.theta = config.theta;
    ctx.margin_tolerance = config.margin_tolerance;
    ctx.seed = config.seed;
    const std::size_t outer = std::min<std::size_t>(threads, std::max<std::size_t>(1, config.checks.size()));
    ctx.threads = std::max(1u, threads / static_cast<unsigned>(outer));
    for (const CheckSpec& check : config.checks) runners.push_back(prepare_check(check, ctx));
  } catch (const ConfigError& e) {
    result.exit_code = kExitConfig;
    result.error = e.what();
    return result;
  }

  const std::filesystem::path dir = options.output_dir.empty() ? config.output_dir : options.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path report = dir / (config.name + ".jsonl");
  std::ofstream out(report, std::ios::binary | std::ios::trunc);
  if (!out) {
    result.exit_code = kExitConfig;
    result.error = "cannot write report '" + report.string() + "'";
    return result;
  }
  result.report_path = report.string();

  std::vector<Slot> slots(runners.size());
  const unsigned outer = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, runners.size())));
  parallel_for(runners.size(), outer, [&](std::size_t k) {
    Slot& slot = slots[k];
    try {
      slot.output = runners[k]();
      slot.ran = true;
    } catch (const SolverError& e) {
      slot.error = e.what();
      slot.solver_failure = true;
    } catch (const DisconnectedError& e) {
      slot.error = e.what();
      slot.solver_failure = true;
    } catch (const std::exception& e) {
      slot.error = e.what();
      slot.solver_failure = true;
    }
  });

  // Rows go out in declared order; the first failing check ends the report.
  bool all_pass = true;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const CheckSpec& spec = config.checks[k];
    const Slot& slot = slots[k];
    CheckResult cr{spec.name, spec.kind, spec.asserted, slot.ran && slot.output.pass, !slot.ran, {}};
    auto stamp = [&](nlohmann::json row) {
      row["suite"] = config.name;
      row["check"] = spec.name;
      row["kind"] = spec.kind;
      row["config_hash"] = config.hash;
      row["seed"] = config.seed;
      return row;
    };
    if (!slot.ran) {
      cr.summary = "error: " + slot.error;
      write_json_line(out, stamp({{"row", "error"}, {"error", slot.error}}));
      result.checks.push_back(cr);
      result.exit_code = kExitSolver;
      result.error = spec.name + ": " + slot.error;
      break;
    }
    for (const nlohmann::json& row : slot.output.rows) write_json_line(out, stamp(row));
    write_json_line(out, stamp({{"row", "verdict"}, {"asserted", spec.asserted}, {"pass", slot.output.pass},
                                {"summary", slot.output.summary}}));
    for (const auto& [suffix, text] : slot.output.tables) {
      std::ofstream csv(dir / (config.name + "." + spec.name + suffix + ".csv"), std::ios::binary | std::ios::trunc);
      csv << "# config_hash=" << config.hash << '\n' << text;
    }
    cr.summary = slot.output.summary;
    if (spec.asserted && !slot.output.pass) all_pass = false;
    result.checks.push_back(cr);
  }
  out.flush();

  nlohmann::json meta{{"suite", config.name},
                      {"config_hash", config.hash},
                      {"seed", config.seed},
                      {"threads", threads},
                      {"created", timestamp()},
                      {"checks", config.checks.size()},
                      {"exit_code", result.exit_code == kExitOk ? (all_pass ? kExitOk : kExitFailedChecks)
                                                                 : result.exit_code}};
  std::ofstream meta_out(dir / (config.name + ".meta.json"), std::ios::binary | std::ios::trunc);
  write_json_line(meta_out, meta);

  if (result.exit_code == kExitOk && !all_pass) result.exit_code = kExitFailedChecks;
  return result;
}

void print_summary(std::ostream& out, const SuiteResult& result) {
  std::size_t width = 5;
  for (const CheckResult& c : result.checks) width = std::max(width, c.name.size());
  out << std::left << std::setw(static_cast<int>(width) + 2) << "check" << std::setw(20) << "kind" << std::setw(8)
      << "assert" << std::setw(8) << "result" << "summary\n";
  for (const CheckResult& c : result.checks) {
    const char* verdict = c.failed_to_run ? "ERROR" : (c.pass ? "PASS" : "FAIL");
    out << std::left << std::setw(static_cast<int>(width) + 2) << c.name << std::setw(20) << c.kind << std::setw(8)
        << (c.asserted ? "yes" : "no") << std::setw(8) << verdict << c.summary << '\n';
  }
  if (!result.error.empty()) out << "error: " << result.error << '\n';
  if (!result.report_path.empty()) out << "report: " << result.report_path << '\n';
  out << "exit status " << result.exit_code << '\n';
}

}  // namespace qglab::tools
