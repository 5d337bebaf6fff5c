#pragma once

// Subcommands of the cfflow tool. Each writes its files into config.output_dir
// and returns the process exit code: 0 success, 1 validation or probe failure.
// Configuration problems surface as ConfigError (exit code 2 in the tool).

#include <string>
#include <utility>
#include <vector>

#include "cfflow/cocycle.hpp"
#include "cfflow/config.hpp"
#include "cfflow/koopman.hpp"

namespace cfflow {

inline constexpr const char* kReportSchema = "cfflow-report/1";

struct CommandResult {
  int exit_code = 0;
  std::vector<std::string> files;  // written, relative to the output directory
  std::string summary;
};

CommandResult cmd_realize(const RunConfig& config);
/// Builds the schedule and cocycle, dumps them and writes the validation report.
CommandResult cmd_build(const RunConfig& config);
/// Re-validates a dumped schedule (config.schedule_path) or a fresh build.
CommandResult cmd_validate(const RunConfig& config);
CommandResult cmd_spectra(const RunConfig& config);
CommandResult cmd_induce(const RunConfig& config);
/// realize (when E is given), build, spectra and induce into one directory, plus report.json.
CommandResult cmd_report(const RunConfig& config);

/// The witness group from the config, or the realization of E.
GroupData resolve_group(const RunConfig& config);
TowerSchedule schedule_from_config(const RunConfig& config, const GroupData& g);

std::string dump_tower(const TowerSchedule& s, const CocycleTable& table);
std::pair<TowerSchedule, CocycleTable> load_tower(const std::string& json_text);

// Verdicts shared by the tool and the acceptance run.
struct Verdict {
  bool pass = false;
  std::string detail;
};
/// Last three rows non-increasing and final residual <= threshold + its deficiency.
Verdict judge_weak_limit(const LevelSeries& series, double threshold);
/// Strictly decreasing residuals with the last one below threshold.
Verdict judge_rigidity(const std::vector<RigidityRow>& rows, double threshold);
/// Deepest-level bound above threshold.
Verdict judge_singularity(const MultiplicityEvidence& ev, double threshold);
Verdict judge_eigen(const EigenReport& rep, double threshold);

/// The lambda grid [from, to] \ {0} with the given step, built from integer multiples.
std::vector<double> lambda_grid(double from, double to, double step);

}  // namespace cfflow
