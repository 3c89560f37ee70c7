#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "clexp/config.hpp"

namespace clexp {

/// Exit codes of the CLI: 0 success, 2 validation error, 3 budget refusal,
/// 4 bound violation detected.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitBudget = 3;
inline constexpr int kExitViolation = 4;

struct RunOutcome {
  int exit_code = kExitOk;
  std::filesystem::path manifest;
};

/// Executes the configured tasks in dependency order (bounds before charfn
/// checks), writes every report under out_dir and a run manifest listing
/// each emitted file with its content digest.
RunOutcome run_experiment(const std::filesystem::path& config_path,
                          const std::filesystem::path& out_dir,
                          std::optional<std::uint64_t> seed_override, int threads);

/// Same, but a named verb other than "run" replaces the configured task
/// list with that single task.
RunOutcome run_experiment_verb(const std::filesystem::path& config_path,
                               const std::filesystem::path& out_dir, const std::string& verb,
                               std::optional<std::uint64_t> seed_override, int threads);

/// Re-emits plot-ready CSV from a previously written JSON report.
/// Supported kinds: charfn, lclt, iclt, integral, factorization, series,
/// mc-mass, decimation, constants-grid.
int emit_plot_data(const std::filesystem::path& report_json, const std::string& kind,
                   const std::filesystem::path& out_dir);

}  // namespace clexp
