#pragma once

#include "cli/config.hpp"

#include <string>

namespace linger::cli {

enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,
    kInconclusive = 2,
    kConfigError = 3,  // invalid config, unwritable output, size guard
    kRuntimeError = 4,
};

int cmd_simulate(const ExperimentConfig& cfg);
int cmd_sweep_alpha(const ExperimentConfig& cfg);
int cmd_verify(const ExperimentConfig& cfg);
int cmd_trace(const ExperimentConfig& cfg);

/// Runs verify check `index` and returns its report record
/// {check, params, statistic, bound, stderr, verdict, details}.
json run_check(const json& check, const ExperimentConfig& cfg, std::size_t index);

/// Entry point: parses arguments, dispatches, maps errors to exit codes.
int run(int argc, char** argv);

}  // namespace linger::cli
