#include "cli/config.hpp"

#include "linger/regression.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace linger::cli {

namespace {

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known)
{
    if (!j.is_object()) {
        throw ConfigError(path + ": expected an object");
    }
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw ConfigError((path.empty() ? key : path + "." + key) + ": unknown key");
        }
    }
}

std::string join(const std::string& path, const char* key)
{
    return path.empty() ? std::string(key) : path + "." + key;
}

int read_int(const json& j, const char* key, int fallback, const std::string& path, int min_value)
{
    const std::uint64_t v = read_u64(j, key, static_cast<std::uint64_t>(fallback), path);
    if (v < static_cast<std::uint64_t>(min_value) || v > 1'000'000) {
        throw ConfigError(join(path, key) + ": must be between " + std::to_string(min_value) + " and 1000000");
    }
    return static_cast<int>(v);
}

std::vector<double> read_rho_grid(const json& j, const std::string& path)
{
    std::vector<double> grid;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number()) {
                throw ConfigError(path + "[" + std::to_string(i) + "]: expected a number");
            }
            grid.push_back(j[i].get<double>());
        }
    } else if (j.is_object()) {
        reject_unknown(j, path, {"x_lo", "x_hi", "n"});
        try {
            grid = rho_grid_for_x(read_double(j, "x_lo", 2.0, path), read_double(j, "x_hi", 5.3, path),
                                  static_cast<int>(read_u64(j, "n", 10, path)));
        } catch (const ParameterError& e) {
            throw ConfigError(path + ": " + e.what());
        }
    } else {
        throw ConfigError(path + ": expected a list of loads or {x_lo, x_hi, n}");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0 && grid[i] < 1.0)) {
            throw ConfigError(path + "[" + std::to_string(i) + "]: loads must lie in (0, 1)");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw ConfigError(path + ": loads must be strictly increasing");
        }
    }
    return grid;
}

ModelSection parse_model(const json& j)
{
    const std::string path = "model";
    reject_unknown(j, path, {"R", "beta", "xi", "zeta"});
    ModelSection m;
    m.R = read_int(j, "R", 2, path, 2);
    if (j.contains("beta")) {
        m.beta = beta_from_json(j["beta"], "model.beta");
    }
    if (j.contains("xi")) {
        m.xi = distribution_from_json(j["xi"], "model.xi");
    }
    if (j.contains("zeta")) {
        m.zeta = distribution_from_json(j["zeta"], "model.zeta");
    }
    return m;
}

RunSection parse_run(const json& j, int R)
{
    const std::string path = "run";
    reject_unknown(j, path,
                   {"rho", "rho_grid", "n_epochs", "burn_in", "n_batches", "seed", "workers", "initial", "stop_total",
                    "growth_threshold", "max_slots"});
    RunSection r;
    if (j.contains("rho")) {
        const double rho = read_double(j, "rho", 0.0, path);
        if (!(rho > 0.0 && rho < 2.0)) {
            throw ConfigError("run.rho: must lie in (0, 2)");
        }
        r.rho = rho;
    }
    if (j.contains("rho_grid")) {
        r.rho_grid = read_rho_grid(j["rho_grid"], "run.rho_grid");
    }
    r.n_epochs = read_u64(j, "n_epochs", r.n_epochs, path);
    if (r.n_epochs < 1) {
        throw ConfigError("run.n_epochs: must be at least 1");
    }
    if (j.contains("burn_in")) {
        r.burn_in = read_u64(j, "burn_in", 0, path);
    }
    r.n_batches = read_int(j, "n_batches", r.n_batches, path, 10);
    r.seed = read_u64(j, "seed", r.seed, path);
    r.workers = read_int(j, "workers", r.workers, path, 1);
    if (j.contains("initial")) {
        const json& init = j["initial"];
        reject_unknown(init, "run.initial", {"active", "inactive"});
        SystemState q = SystemState::zeros(R);
        if (init.contains("active")) {
            q.active = read_u64_list(init["active"], "run.initial.active");
        }
        if (init.contains("inactive")) {
            q.inactive = read_u64_list(init["inactive"], "run.initial.inactive");
        }
        if (q.active.size() != static_cast<std::size_t>(R) || q.inactive.size() != static_cast<std::size_t>(R)) {
            throw ConfigError("run.initial: vectors must have length model.R = " + std::to_string(R));
        }
        r.initial = q;
    }
    if (j.contains("stop_total")) {
        r.stop_total = read_u64(j, "stop_total", 0, path);
    }
    if (j.contains("growth_threshold")) {
        r.growth_threshold = read_double(j, "growth_threshold", 0.0, path);
    }
    r.max_slots = read_u64(j, "max_slots", r.max_slots, path);
    return r;
}

TraceSection parse_trace(const json& j)
{
    const std::string path = "trace";
    reject_unknown(j, path, {"skip_cycles", "cycles", "max_rows"});
    TraceSection t;
    t.skip_cycles = read_u64(j, "skip_cycles", t.skip_cycles, path);
    t.cycles = read_u64(j, "cycles", t.cycles, path);
    t.max_rows = read_u64(j, "max_rows", t.max_rows, path);
    if (t.cycles < 1) {
        throw ConfigError("trace.cycles: must be at least 1");
    }
    return t;
}

}  // namespace

std::uint64_t read_u64(const json& j, const char* key, std::uint64_t fallback, const std::string& path)
{
    if (!j.contains(key)) {
        return fallback;
    }
    const json& v = j[key];
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    // Allow 1e6-style literals when they are exact non-negative integers.
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d >= 0.0 && d < 1.8e19 && std::floor(d) == d) {
            return static_cast<std::uint64_t>(d);
        }
    }
    throw ConfigError(join(path, key) + ": expected a non-negative integer");
}

double read_double(const json& j, const char* key, double fallback, const std::string& path)
{
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_number()) {
        throw ConfigError(join(path, key) + ": expected a number");
    }
    return j[key].get<double>();
}

std::vector<std::uint64_t> read_u64_list(const json& j, const std::string& path)
{
    if (!j.is_array()) {
        throw ConfigError(path + ": expected a list of non-negative integers");
    }
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        json wrap = {{"v", j[i]}};
        out.push_back(read_u64(wrap, "v", 0, path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

ExperimentConfig parse_config(const json& doc)
{
    reject_unknown(doc, "", {"schema_version", "model", "run", "output", "trace", "verify"});
    if (!doc.contains("schema_version")) {
        throw ConfigError("schema_version: missing");
    }
    if (read_u64(doc, "schema_version", 0, "") != static_cast<std::uint64_t>(kSchemaVersion)) {
        throw ConfigError("schema_version: only version " + std::to_string(kSchemaVersion) + " is supported");
    }
    ExperimentConfig cfg;
    if (doc.contains("model")) {
        cfg.model = parse_model(doc["model"]);
    }
    if (!doc.contains("run")) {
        throw ConfigError("run: missing (the seed must be given)");
    }
    if (!doc["run"].contains("seed")) {
        throw ConfigError("run.seed: missing");
    }
    cfg.run = parse_run(doc["run"], cfg.model.R);
    if (doc.contains("output")) {
        reject_unknown(doc["output"], "output", {"dir"});
        if (doc["output"].contains("dir")) {
            if (!doc["output"]["dir"].is_string()) {
                throw ConfigError("output.dir: expected a string");
            }
            cfg.out_dir = doc["output"]["dir"].get<std::string>();
        }
    }
    if (doc.contains("trace")) {
        cfg.trace = parse_trace(doc["trace"]);
    }
    if (doc.contains("verify")) {
        if (!doc["verify"].is_array()) {
            throw ConfigError("verify: expected a list of checks");
        }
        cfg.verify = doc["verify"];
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open config file");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(doc);
}

json effective_config(const ExperimentConfig& cfg)
{
    json j;
    j["schema_version"] = kSchemaVersion;
    json& m = j["model"];
    m["R"] = cfg.model.R;
    m["beta"] = to_json(cfg.model.beta);
    if (cfg.model.xi) {
        m["xi"] = to_json(*cfg.model.xi);
    }
    m["zeta"] = to_json(cfg.model.zeta);
    json& r = j["run"];
    if (cfg.run.rho) {
        r["rho"] = *cfg.run.rho;
    }
    if (!cfg.run.rho_grid.empty()) {
        r["rho_grid"] = cfg.run.rho_grid;
    }
    r["n_epochs"] = cfg.run.n_epochs;
    if (cfg.run.burn_in) {
        r["burn_in"] = *cfg.run.burn_in;
    }
    r["n_batches"] = cfg.run.n_batches;
    r["seed"] = cfg.run.seed;
    if (cfg.run.initial) {
        r["initial"] = {{"active", cfg.run.initial->active}, {"inactive", cfg.run.initial->inactive}};
    }
    if (cfg.run.stop_total) {
        r["stop_total"] = *cfg.run.stop_total;
    }
    if (cfg.run.growth_threshold) {
        r["growth_threshold"] = *cfg.run.growth_threshold;
    }
    r["max_slots"] = cfg.run.max_slots;
    j["trace"] = {{"skip_cycles", cfg.trace.skip_cycles},
                  {"cycles", cfg.trace.cycles},
                  {"max_rows", cfg.trace.max_rows}};
    if (!cfg.verify.empty()) {
        j["verify"] = cfg.verify;
    }
    return j;
}

ModelParams model_params(const ExperimentConfig& cfg)
{
    ModelParams p;
    p.R = cfg.model.R;
    p.beta = cfg.model.beta;
    p.zeta = cfg.model.zeta;
    if (cfg.model.xi && cfg.run.rho) {
        throw ConfigError("run.rho: give either run.rho or model.xi, not both");
    }
    if (cfg.model.xi) {
        p.xi = *cfg.model.xi;
    } else if (cfg.run.rho) {
        p.xi = geometric_xi_for_load(*cfg.run.rho);
    } else {
        throw ConfigError("run.rho: missing (or give model.xi)");
    }
    return p;
}

}  // namespace linger::cli
