#pragma once

#include <filesystem>
#include <string>

namespace csc {

/// Exit codes of the experiment runner: 0 success, 2 invalid configuration,
/// 3 numerical failure (diagnostic JSON written when possible).
enum class RunStatus : int { ok = 0, invalid_config = 2, numerical_failure = 3 };

struct RunOptions {
    std::filesystem::path output_dir; // overrides the config when non-empty
    int jobs = 1;
    bool verbose = false;
};

/// Execute one experiment described by a strict-schema JSON config file.
/// Artifacts are written atomically; manifest.json lists every produced file
/// with content hashes. Identical config + seed gives byte-identical output.
RunStatus run_experiment(const std::filesystem::path& config_path, const RunOptions& opt);

/// Expand list-valued parameters into a run per combination (parallel up to
/// opt.jobs), then merge per-run summaries into summary.csv in sorted
/// parameter order.
RunStatus run_sweep(const std::filesystem::path& config_path, const RunOptions& opt);

} // namespace csc
