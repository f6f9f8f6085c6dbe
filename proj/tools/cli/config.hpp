#pragma once

#include "linger/io.hpp"
#include "linger/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace linger::cli {

inline constexpr int kSchemaVersion = 1;

struct ModelSection {
    int R = 2;
    Beta beta{2.0};
    std::optional<DistributionSpec> xi;  // defaults to geometric at run.rho
    DistributionSpec zeta = DistributionSpec::point_mass(1);
};

struct RunSection {
    std::optional<double> rho;
    std::vector<double> rho_grid;
    std::uint64_t n_epochs = 20'000;
    std::optional<std::uint64_t> burn_in;  // epochs; default 20%
    int n_batches = 30;
    std::uint64_t seed = 1;
    int workers = 1;
    std::optional<SystemState> initial;
    std::optional<std::uint64_t> stop_total;
    std::optional<double> growth_threshold;
    std::uint64_t max_slots = 1'000'000'000;
};

struct TraceSection {
    std::uint64_t skip_cycles = 0;
    std::uint64_t cycles = 1;
    std::uint64_t max_rows = 1'000'000;
};

struct ExperimentConfig {
    ModelSection model;
    RunSection run;
    std::string out_dir = ".";
    TraceSection trace;
    json verify = json::array();  // check records, validated when run
};

/// Parses a config document. Errors name the offending JSON path.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::string& path);

/// Everything that determines numeric output (workers and the output
/// directory are left out), echoed into every output file.
json effective_config(const ExperimentConfig& cfg);

/// ModelParams for load rho: model.xi if given, otherwise geometric at rho.
ModelParams model_params(const ExperimentConfig& cfg);

/// Small typed readers shared with the verify checks.
std::uint64_t read_u64(const json& j, const char* key, std::uint64_t fallback, const std::string& path);
double read_double(const json& j, const char* key, double fallback, const std::string& path);
std::vector<std::uint64_t> read_u64_list(const json& j, const std::string& path);

}  // namespace linger::cli
