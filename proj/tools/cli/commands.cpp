#include "cli/commands.hpp"

#include "linger/estimators.hpp"
#include "linger/oracles.hpp"
#include "linger/regression.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace linger::cli {

namespace {

constexpr std::uint64_t kSimulateTag = 0x53494DULL;
constexpr std::uint64_t kTraceTag = 0x5452ULL;

std::string num(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string header_block(const char* command, const ExperimentConfig& cfg)
{
    std::string h = "# linger ";
    h += command;
    h += "\n# schema_version: " + std::to_string(kSchemaVersion);
    h += "\n# seed: " + std::to_string(cfg.run.seed);
    h += "\n# config: " + effective_config(cfg).dump() + "\n";
    return h;
}

json json_header(const char* command, const ExperimentConfig& cfg)
{
    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    j["seed"] = cfg.run.seed;
    j["config"] = effective_config(cfg);
    return j;
}

void write_file(const ExperimentConfig& cfg, const std::string& name, const std::string& content)
{
    const std::filesystem::path dir(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content) || !out.flush()) {
        throw ConfigError("output.dir: cannot write " + path.string());
    }
}

std::string optional_u64(const std::optional<std::uint64_t>& v)
{
    return v ? std::to_string(*v) : "";
}

json estimator_json(const EstimatorResult& e)
{
    return {{"mean", e.mean},
            {"ci_half_width", e.ci_half_width},
            {"n_epochs", e.n_epochs},
            {"burn_in", e.burn_in},
            {"n_batches", e.n_batches}};
}

json lingering_json(const LingeringStats& s)
{
    return {{"mean_t_star", s.mean_t_star},
            {"mean_tau_max", s.mean_tau_max},
            {"mean_gap_t_star_tau_max", s.mean_gap_t_star_tau_max},
            {"mean_gap_t_star_tau_min", s.mean_gap_t_star_tau_min},
            {"idle_fraction", s.idle_fraction},
            {"n_cycles", s.n_cycles}};
}

}  // namespace

int cmd_simulate(const ExperimentConfig& cfg)
{
    const Model model(model_params(cfg));
    ChainStreams streams(cfg.run.seed, kSimulateTag, model.R());
    const SystemState q0 = cfg.run.initial.value_or(SystemState::zeros(model.R()));

    std::string csv = header_block("simulate", cfg);
    csv += "epoch,total,t_star,tau_max\n";
    std::vector<double> totals;
    std::vector<double> active_totals;
    std::vector<double> t_stars;
    LingeringAccumulator lingering;
    CycleOptions options;
    options.max_slots = cfg.run.max_slots;
    std::function<bool(const SystemState&)> stop;
    if (cfg.run.stop_total) {
        const std::uint64_t limit = *cfg.run.stop_total;
        stop = [limit](const SystemState& q) { return q.total() >= limit; };
    }

    json summary = json_header("simulate", cfg);
    summary["rho"] = model.rho();
    std::string failure;
    SystemState final_state;
    try {
        final_state = run_chain(
            q0, cfg.run.n_epochs, model, streams,
            [&](std::uint64_t epoch, const SystemState& q, const CycleRecord& rec) {
                csv += std::to_string(epoch) + ',' + std::to_string(q.total()) + ',' + std::to_string(rec.t_star) +
                       ',' + optional_u64(rec.tau_max) + '\n';
                totals.push_back(static_cast<double>(q.total()));
                active_totals.push_back(static_cast<double>(q.active_total()));
                t_stars.push_back(static_cast<double>(rec.t_star));
                lingering.add(rec);
            },
            options, stop);
        totals.push_back(static_cast<double>(final_state.total()));
        active_totals.push_back(static_cast<double>(final_state.active_total()));
    } catch (const DivergedCycleError& e) {
        failure = e.what();
    }
    write_file(cfg, "epochs.csv", csv);

    summary["epochs_run"] = t_stars.size();
    if (!failure.empty()) {
        summary["error"] = failure;
    } else {
        summary["final_state"] = {{"active", final_state.active}, {"inactive", final_state.inactive}};
    }
    if (!t_stars.empty()) {
        summary["lingering"] = lingering_json(lingering.result());
    }
    if (model.rho() < 1.0 && failure.empty()) {
        const std::uint64_t burn_in = cfg.run.burn_in.value_or(default_burn_in(totals.size()));
        try {
            const EstimatorResult est = stationary_mean(totals, burn_in, cfg.run.n_batches);
            summary["stationary_mean"] = estimator_json(est);
            summary["F"] = est.mean > 0.0 ? json(scaling_F(est.mean, model.rho())) : json(nullptr);
            if (model.beta().is_infinite()) {
                const StationarityCheck s = check_stationarity_identity(active_totals, t_stars, model.R(),
                                                                        model.xi().mean(), burn_in, cfg.run.n_batches);
                summary["stationarity_identity"] = {
                    {"lhs", s.lhs}, {"rhs", s.rhs}, {"z_score", s.z_score}, {"stderr", s.stderr}};
            }
        } catch (const EstimationError& e) {
            summary["stationary_mean"] = nullptr;
            summary["estimation_error"] = e.what();
        }
    } else if (totals.size() >= 4) {
        const std::optional<double> g = cfg.run.growth_threshold
                                            ? growth_rate_above(totals, *cfg.run.growth_threshold)
                                            : growth_rate(totals);
        summary["growth_rate"] = g ? json(*g) : json(nullptr);
        summary["transient"] = g.has_value();
    }
    write_file(cfg, "summary.json", summary.dump(2) + "\n");
    if (!failure.empty()) {
        std::cerr << "simulate: " << failure << '\n';
        return kRuntimeError;
    }
    return kOk;
}

int cmd_sweep_alpha(const ExperimentConfig& cfg)
{
    if (cfg.model.xi) {
        throw ConfigError("model.xi: sweeps use geometric arrivals at each grid load; remove model.xi");
    }
    SweepOptions opt;
    opt.beta = cfg.model.beta;
    opt.R = cfg.model.R;
    opt.zeta = cfg.model.zeta;
    if (!cfg.run.rho_grid.empty()) {
        opt.rho_grid = cfg.run.rho_grid;
    }
    opt.epochs_per_point = cfg.run.n_epochs;
    if (cfg.run.burn_in) {
        if (*cfg.run.burn_in >= cfg.run.n_epochs) {
            throw ConfigError("run.burn_in: must be smaller than run.n_epochs");
        }
        opt.burn_in_fraction = static_cast<double>(*cfg.run.burn_in) / static_cast<double>(cfg.run.n_epochs);
    }
    opt.n_batches = cfg.run.n_batches;
    opt.seed = cfg.run.seed;
    opt.workers = cfg.run.workers;
    opt.max_slots = cfg.run.max_slots;
    const SweepOutcome sweep = sweep_alpha(opt);

    std::string csv = header_block("sweep-alpha", cfg);
    csv += "rho,x,F,mean,ci,n_epochs\n";
    for (const auto& p : sweep.points) {
        csv += num(p.rho) + ',' + num(p.x()) + ',' + num(p.F) + ',' + num(p.mean) + ',' + num(p.ci) + ',' +
               std::to_string(p.n_epochs) + '\n';
    }
    write_file(cfg, "sweep.csv", csv);

    json result = json_header("sweep-alpha", cfg);
    result["beta"] = to_json(opt.beta);
    result["R"] = opt.R;
    if (sweep.fit) {
        result["alpha_hat"] = sweep.fit->alpha_hat;
        result["log_c_hat"] = sweep.fit->log_c_hat;
        result["window_start"] = sweep.fit->window_start;
        result["n_fitted"] = sweep.fit->n_fitted;
        result["rss"] = sweep.fit->rss;
    } else {
        result["alpha_hat"] = nullptr;
        result["fit_error"] = sweep.fit_error;
    }
    json errors = json::array();
    for (const auto& s : sweep.statuses) {
        if (!s.point) {
            errors.push_back({{"rho", s.rho}, {"error", s.error}});
        }
    }
    result["point_errors"] = errors;
    write_file(cfg, "result.json", result.dump(2) + "\n");
    for (const auto& e : errors) {
        std::cerr << "sweep-alpha: " << e["error"].get<std::string>() << '\n';
    }
    if (!sweep.fit) {
        std::cerr << "sweep-alpha: " << sweep.fit_error << '\n';
        return kCheckFailed;
    }
    return errors.empty() ? kOk : kCheckFailed;
}

namespace {

// Reads check parameters with defaults and keeps the values actually used,
// so the report echoes a complete, reproducible parameter set.
class CheckArgs {
public:
    CheckArgs(const json& in, std::string path) : in_(in), path_(std::move(path)) {}

    double real(const char* key, double fallback)
    {
        const double v = read_double(in_, key, fallback, path_);
        used_[key] = v;
        return v;
    }

    std::uint64_t count(const char* key, std::uint64_t fallback)
    {
        const std::uint64_t v = read_u64(in_, key, fallback, path_);
        used_[key] = v;
        return v;
    }

    std::vector<std::uint64_t> list(const char* key, std::vector<std::uint64_t> fallback)
    {
        auto v = in_.contains(key) ? read_u64_list(in_[key], path_ + "." + key) : std::move(fallback);
        used_[key] = v;
        return v;
    }

    Beta beta(const char* key, Beta fallback)
    {
        const Beta b = in_.contains(key) ? beta_from_json(in_[key], path_ + "." + key) : fallback;
        used_[key] = to_json(b);
        return b;
    }

    DistributionSpec law(const char* key, const DistributionSpec& fallback)
    {
        const DistributionSpec d = in_.contains(key) ? distribution_from_json(in_[key], path_ + "." + key) : fallback;
        used_[key] = to_json(d);
        return d;
    }

    // xi given directly or as a geometric law at load "rho".
    DistributionSpec xi(double default_rho)
    {
        if (in_.contains("xi")) {
            if (in_.contains("rho")) {
                throw ConfigError(path_ + ": give either rho or xi, not both");
            }
            return law("xi", DistributionSpec::point_mass(0));
        }
        const double rho = real("rho", default_rho);
        try {
            return geometric_xi_for_load(rho);
        } catch (const ParameterError& e) {
            throw ConfigError(path_ + ".rho: " + e.what());
        }
    }

    std::string text(const char* key, const std::string& fallback)
    {
        std::string v = fallback;
        if (in_.contains(key)) {
            if (!in_[key].is_string()) {
                throw ConfigError(path_ + "." + key + ": expected a string");
            }
            v = in_[key].get<std::string>();
        }
        used_[key] = v;
        return v;
    }

    void set(const char* key, json value) { used_[key] = std::move(value); }

    void finish() const
    {
        for (const auto& [key, value] : in_.items()) {
            if (key != "check" && !used_.contains(key)) {
                throw ConfigError(path_ + "." + key + ": unknown parameter for this check");
            }
        }
    }

    const json& used() const { return used_; }
    const std::string& path() const { return path_; }

private:
    const json& in_;
    std::string path_;
    json used_ = json::object();
};

json record(const std::string& check, const CheckArgs& args, double statistic, double bound, double stderr,
            const std::string& verdict, json details = json::object())
{
    return {{"check", check},     {"params", args.used()}, {"statistic", statistic}, {"bound", bound},
            {"stderr", stderr},   {"verdict", verdict},    {"details", std::move(details)}};
}

const char* pass_fail(bool ok)
{
    return ok ? "pass" : "fail";
}

Model make_model(int R, Beta beta, const DistributionSpec& xi, const DistributionSpec& zeta)
{
    ModelParams p;
    p.R = R;
    p.beta = beta;
    p.xi = xi;
    p.zeta = zeta;
    return Model(p);
}

json check_bound(const std::string& name, CheckArgs& args, std::uint64_t seed, bool sqrt_form)
{
    const auto x = args.list("x", {});
    if (x.empty()) {
        throw ConfigError(args.path() + ".x: missing or empty");
    }
    const std::string walk = args.text("walk", "distribution");
    WalkSpec spec;
    if (walk == "distribution") {
        spec = WalkSpec::from_distribution(args.law("law", geometric_xi_for_load(1.0)));
    } else if (walk == "hitting_time") {
        spec = WalkSpec::hitting_time(args.xi(0.9));
    } else {
        throw ConfigError(args.path() + ".walk: expected \"distribution\" or \"hitting_time\"");
    }
    const std::uint64_t n = args.count("n_samples", 10'000);
    args.finish();
    RngStream rng(seed, 0);
    const BoundCheck c = sqrt_form ? verify_bound_max_sqrt(x, spec, n, rng) : verify_bound_max(x, spec, n, rng);
    return record(name, args, c.empirical, c.bound, c.stderr, pass_fail(c.satisfied),
                  {{"step_mean", spec.step_mean}, {"step_variance", spec.step_variance}});
}

json check_bound_suite(const std::string& name, CheckArgs& args, std::uint64_t seed, int workers, bool sqrt_form)
{
    const auto instances = args.count("instances", sqrt_form ? 20 : 100);
    const auto n = args.count("n_samples", 10'000);
    args.finish();
    const BoundSuiteResult r = verify_bound_suite(static_cast<int>(instances), n, seed, sqrt_form, workers);
    double worst = INFINITY;
    for (const auto& inst : r.instances) {
        const double slack = sqrt_form ? inst.check.empirical - inst.check.bound : inst.check.bound - inst.check.empirical;
        worst = std::min(worst, slack);
    }
    return record(name, args, r.violations, 0.0, 0.0, pass_fail(r.violations == 0), {{"smallest_slack", worst}});
}

json check_tstar_gap(CheckArgs& args, std::uint64_t seed, int workers)
{
    const DistributionSpec xi = args.xi(0.9);
    const int R = static_cast<int>(args.count("R", 2));
    std::vector<std::vector<std::uint64_t>> grid;
    std::vector<std::uint64_t> scales = args.list("scales", {100, 1000, 10000});
    for (auto s : scales) {
        grid.emplace_back(static_cast<std::size_t>(R), s);
    }
    const std::uint64_t n = args.count("n_per_state", 1000);
    args.finish();
    const Model model = make_model(R, Beta::infinite(), xi, DistributionSpec::point_mass(1));
    const TStarGapResult r = verify_tstar_gap(grid, model, n, seed, workers);
    json means = json::array();
    for (const auto& s : r.states) {
        means.push_back({{"scale", s.a.front()}, {"mean_gap", s.mean_gap}, {"stderr", s.stderr}});
    }
    return record("tstar_gap", args, r.slope, kGuardSigmas * r.slope_stderr, r.slope_stderr, pass_fail(r.no_growth),
                  {{"max_mean_gap", r.max_mean_gap}, {"states", means}});
}

json check_hitting_time(CheckArgs& args, std::uint64_t seed)
{
    const DistributionSpec xi = args.xi(0.9);
    const std::uint64_t a = args.count("a", 10);
    const std::uint64_t n = args.count("n_samples", 10'000);
    args.finish();
    RngStream rng(seed, 0);
    const HittingTimeCheck c = hitting_time_check(a, xi, n, rng);
    return record("hitting_time", args, c.mean, c.expected, c.stderr, pass_fail(c.satisfied),
                  {{"z_score", c.z_score}});
}

json check_drift(CheckArgs& args, std::uint64_t seed)
{
    const Beta beta = args.beta("beta", Beta(0.3));
    const DistributionSpec xi = args.xi(0.9);
    const DistributionSpec zeta = args.law("zeta", DistributionSpec::point_mass(1));
    const std::uint64_t a = args.count("a", 1000);
    const std::uint64_t n = args.count("n_samples", 100'000);
    args.finish();
    const Model model = make_model(2, beta, xi, zeta);
    RngStream rng(seed, 0);
    const DriftEstimate d = estimate_drift(a, model, n, rng);
    const bool ok = std::abs(d.two_delta - d.heuristic) <= kGuardSigmas * d.stderr;
    return record("drift", args, d.two_delta, d.heuristic, d.stderr, pass_fail(ok));
}

json check_drift_root(CheckArgs& args, std::uint64_t seed)
{
    const Beta beta = args.beta("beta", Beta(0.3));
    const DistributionSpec xi = args.xi(0.9);
    const std::uint64_t a_lo = args.count("a_lo", 1);
    const std::uint64_t a_hi = args.count("a_hi", 1'000'000);
    const std::uint64_t n = args.count("n_samples", 100'000);
    args.finish();
    const Model model = make_model(2, beta, xi, DistributionSpec::point_mass(1));
    const DriftBracket b = bracket_drift_root(model, a_lo, a_hi, n, seed);
    const double root = std::sqrt(b.lower * b.upper);
    const bool ok = root >= b.predicted / 2.0 && root <= 2.0 * b.predicted;
    return record("drift_root", args, root, b.predicted, 0.0, pass_fail(ok),
                  {{"lower", b.lower}, {"upper", b.upper}, {"evaluations", b.evaluations}});
}

json check_local_times(CheckArgs& args, std::uint64_t seed, int workers)
{
    const DistributionSpec xi = args.xi(0.9);
    const std::uint64_t horizon = args.count("horizon", 2000);
    const std::uint64_t max_level = args.count("max_level", 50);
    const std::uint64_t n = args.count("n_paths", 20'000);
    args.finish();
    const LocalTimeProfile p = conditioned_local_times(horizon, xi, static_cast<int>(max_level), n, seed, workers);
    const double limit = 1.0 / (1.0 - Distribution(xi).mean());
    const double top = p.mean.back();
    const double se = p.stderr.back();
    const bool ok = std::abs(top - limit) <= kGuardSigmas * se;
    return record("local_times", args, top, limit, se, pass_fail(ok),
                  {{"supremum", p.supremum}, {"acceptance_rate", p.acceptance_rate}, {"profile", p.mean}});
}

json check_release_count(CheckArgs& args, std::uint64_t seed, int workers)
{
    const Beta beta = args.beta("beta", Beta(2.0));
    const DistributionSpec xi = args.xi(0.9);
    const std::uint64_t horizon = args.count("horizon", 500);
    const std::uint64_t n = args.count("n_samples", 100'000);
    const std::uint64_t max_n = args.count("max_n", 10);
    const double tolerance = args.real("tolerance", 0.01);
    args.finish();
    const ReleaseCountResult r =
        release_count_distribution(beta, horizon, n, xi, seed, workers, static_cast<int>(max_n), tolerance);
    bool decreasing = true;
    for (std::size_t k = 1; k < r.tail.size(); ++k) {
        decreasing = decreasing && r.tail[k] <= r.tail[k - 1];
    }
    std::string verdict = "pass";
    if (!(r.p_zero - kGuardSigmas * r.p_zero_stderr > 0.0) || !decreasing) {
        verdict = "fail";
    } else if (r.inconclusive) {
        verdict = "inconclusive";
    }
    return record("release_count", args, r.p_zero, 0.0, r.p_zero_stderr, verdict,
                  {{"tail", r.tail},
                   {"tail_doubled_horizon", r.tail_2h},
                   {"max_horizon_gap", r.max_horizon_gap},
                   {"histogram", r.histogram},
                   {"acceptance_rate", r.acceptance_rate}});
}

json check_tail_B(CheckArgs& args, std::uint64_t seed, int workers)
{
    const Beta beta = args.beta("beta", Beta(2.0));
    const DistributionSpec xi = args.xi(0.9);
    const std::uint64_t horizon = args.count("horizon", 2000);
    const std::uint64_t n = args.count("n_samples", 20'000);
    const double tolerance = args.real("tolerance", 0.3);
    args.finish();
    try {
        const TailEstimate t = tail_exponent_B(beta, horizon, n, xi, seed, workers);
        const bool ok = std::abs(t.exponent_hat - beta.value()) <= tolerance;
        return record("tail_B", args, t.exponent_hat, beta.value(), t.stderr, pass_fail(ok),
                      {{"n_finite", t.n_finite}, {"bins_used", t.bins_used}});
    } catch (const EstimationError& e) {
        return record("tail_B", args, NAN, beta.value(), NAN, "inconclusive", {{"error", e.what()}});
    }
}

json check_a_scaling(CheckArgs& args, std::uint64_t seed, int workers)
{
    const Beta beta = args.beta("beta", Beta(1.2));
    const DistributionSpec xi = args.xi(0.99);
    const auto grid = args.list("a1_grid", {100, 1000, 10000});
    const std::uint64_t n = args.count("n_samples", 2000);
    const double target = args.real("target", 0.4);
    const double tolerance = args.real("tolerance", 0.15);
    args.finish();
    const Model model = make_model(2, beta, xi, DistributionSpec::point_mass(1));
    const AScalingResult r = scaling_of_A_at_Tstar(model, grid, n, seed, workers);
    json points = json::array();
    for (const auto& p : r.points) {
        points.push_back({{"a1", p.a1}, {"mean", p.mean}, {"stderr", p.stderr}});
    }
    if (r.degenerate) {
        return record("a_scaling", args, NAN, target, NAN, "inconclusive",
                      {{"degenerate", true}, {"points", points}});
    }
    return record("a_scaling", args, r.slope, target, r.slope_stderr,
                  pass_fail(std::abs(r.slope - target) <= tolerance), {{"degenerate", false}, {"points", points}});
}

json check_lingering(CheckArgs& args, std::uint64_t seed, int workers)
{
    const DistributionSpec xi = args.xi(0.9);
    const auto grid = args.list("a_grid", {100, 1000, 10000, 100000});
    const std::uint64_t n = args.count("n_cycles", 1000);
    const double target = args.real("target", 0.5);
    const double tolerance = args.real("tolerance", 0.1);
    args.finish();
    const Model model = make_model(2, Beta::infinite(), xi, DistributionSpec::point_mass(1));
    const LingeringScaling r = lingering_scaling(model, grid, n, seed, workers);
    json points = json::array();
    for (const auto& p : r.points) {
        points.push_back({{"a", p.a}, {"mean_gap", p.mean_gap}, {"stderr", p.stderr}});
    }
    return record("lingering", args, r.slope, target, r.slope_stderr,
                  pass_fail(std::abs(r.slope - target) <= tolerance), {{"points", points}});
}

json check_stationarity(CheckArgs& args, std::uint64_t seed)
{
    const DistributionSpec xi = args.xi(0.9);
    const int R = static_cast<int>(args.count("R", 2));
    const std::uint64_t n = args.count("n_epochs", 100'000);
    args.finish();
    const Model model = make_model(R, Beta::infinite(), xi, DistributionSpec::point_mass(1));
    ChainStreams streams(seed, 0, R);
    std::vector<double> active;
    std::vector<double> t_stars;
    const SystemState last = run_chain(SystemState::zeros(R), n, model, streams,
                                       [&](std::uint64_t, const SystemState& q, const CycleRecord& rec) {
                                           active.push_back(static_cast<double>(q.active_total()));
                                           t_stars.push_back(static_cast<double>(rec.t_star));
                                       });
    active.push_back(static_cast<double>(last.active_total()));
    const StationarityCheck s =
        check_stationarity_identity(active, t_stars, R, model.xi().mean(), default_burn_in(n), kDefaultBatches);
    return record("stationarity", args, s.lhs, s.rhs, s.stderr, pass_fail(std::abs(s.z_score) <= kGuardSigmas),
                  {{"z_score", s.z_score}, {"lhs_total", s.lhs_total}, {"rhs_total", s.rhs_total}});
}

}  // namespace

json run_check(const json& check, const ExperimentConfig& cfg, std::size_t index)
{
    const std::string path = "verify[" + std::to_string(index) + "]";
    if (!check.is_object() || !check.contains("check") || !check["check"].is_string()) {
        throw ConfigError(path + ": expected an object with a string \"check\"");
    }
    const std::string name = check["check"].get<std::string>();
    const std::uint64_t seed = derive_stream_id(cfg.run.seed, index);
    const int workers = cfg.run.workers;
    CheckArgs args(check, path);
    try {
        if (name == "bound_max" || name == "bound_max_sqrt") {
            return check_bound(name, args, seed, name == "bound_max_sqrt");
        }
        if (name == "bound_max_suite" || name == "bound_max_sqrt_suite") {
            return check_bound_suite(name, args, seed, workers, name == "bound_max_sqrt_suite");
        }
        if (name == "tstar_gap") {
            return check_tstar_gap(args, seed, workers);
        }
        if (name == "hitting_time") {
            return check_hitting_time(args, seed);
        }
        if (name == "drift") {
            return check_drift(args, seed);
        }
        if (name == "drift_root") {
            return check_drift_root(args, seed);
        }
        if (name == "local_times") {
            return check_local_times(args, seed, workers);
        }
        if (name == "release_count") {
            return check_release_count(args, seed, workers);
        }
        if (name == "tail_B") {
            return check_tail_B(args, seed, workers);
        }
        if (name == "a_scaling") {
            return check_a_scaling(args, seed, workers);
        }
        if (name == "lingering") {
            return check_lingering(args, seed, workers);
        }
        if (name == "stationarity") {
            return check_stationarity(args, seed);
        }
    } catch (const ParameterError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    throw ConfigError(path + ".check: unknown check \"" + name + "\"");
}

int cmd_verify(const ExperimentConfig& cfg)
{
    if (cfg.verify.empty()) {
        throw ConfigError("verify: no checks requested");
    }
    json report = json::array();
    bool failed = false;
    bool inconclusive = false;
    for (std::size_t i = 0; i < cfg.verify.size(); ++i) {
        json rec = run_check(cfg.verify[i], cfg, i);
        const std::string verdict = rec["verdict"].get<std::string>();
        failed = failed || verdict == "fail";
        inconclusive = inconclusive || verdict == "inconclusive";
        std::cerr << rec["check"].get<std::string>() << ": " << verdict << '\n';
        json entry = {{"schema_version", kSchemaVersion}, {"seed", cfg.run.seed}};
        entry.update(rec);
        report.push_back(std::move(entry));
    }
    write_file(cfg, "verify.json", report.dump(2) + "\n");
    if (failed) {
        return kCheckFailed;
    }
    return inconclusive ? kInconclusive : kOk;
}

namespace {

constexpr std::uint64_t kMaxTraceCycles = 100'000;

class TraceWriter : public CycleObserver {
public:
    TraceWriter(std::string& out, std::uint64_t max_rows) : out_(out), max_rows_(max_rows) {}

    void begin_cycle(const SystemState& q)
    {
        inactive_ = q.inactive;
        base_ = slot_;
    }

    void on_active_slot(const SlotEvent& e) override
    {
        row(base_ + e.slot, e.position, "active", e.a_after, e.released);
    }

    void on_inactive_slot(std::uint64_t slot, int position, std::uint64_t arrivals) override
    {
        auto& len = inactive_[static_cast<std::size_t>(position)];
        len += arrivals;
        row(base_ + slot, position, "inactive", len, false);
    }

    void on_slot_end(std::uint64_t slot, bool) override { slot_ = base_ + slot; }

private:
    void row(std::uint64_t slot, int queue, const char* group, std::uint64_t length, bool released)
    {
        if (++rows_ > max_rows_) {
            throw SizeGuardError("trace: more than trace.max_rows = " + std::to_string(max_rows_) +
                                 " rows; shrink trace.cycles or raise trace.max_rows");
        }
        out_ += std::to_string(slot) + ',' + std::to_string(queue) + ',' + group + ',' + std::to_string(length) +
                ',' + (released ? '1' : '0') + '\n';
    }

    std::string& out_;
    std::uint64_t max_rows_;
    std::uint64_t rows_ = 0;
    std::uint64_t slot_ = 0;
    std::uint64_t base_ = 0;
    std::vector<std::uint64_t> inactive_;
};

}  // namespace

int cmd_trace(const ExperimentConfig& cfg)
{
    if (cfg.trace.cycles > kMaxTraceCycles) {
        throw SizeGuardError("trace.cycles: at most " + std::to_string(kMaxTraceCycles) + " cycles per trace");
    }
    const Model model(model_params(cfg));
    ChainStreams streams(cfg.run.seed, kTraceTag, model.R());
    SystemState q = cfg.run.initial.value_or(SystemState::zeros(model.R()));
    CycleOptions quiet;
    quiet.max_slots = cfg.run.max_slots;
    CycleRecord rec;
    for (std::uint64_t k = 0; k < cfg.trace.skip_cycles; ++k) {
        q = embedded_step(q, model, streams, rec, quiet);
    }
    std::string csv = header_block("trace", cfg);
    csv += "slot,queue,group,length,released\n";
    TraceWriter writer(csv, cfg.trace.max_rows);
    CycleOptions traced = quiet;
    traced.observer = &writer;
    traced.per_slot_inactive = true;
    for (std::uint64_t k = 0; k < cfg.trace.cycles; ++k) {
        writer.begin_cycle(q);
        q = embedded_step(q, model, streams, rec, traced);
    }
    write_file(cfg, "trace.csv", csv);
    return kOk;
}

int run(int argc, char** argv)
{
    CLI::App app{"Two-group queue-based random-access simulator"};
    app.require_subcommand(1);
    struct Flags {
        std::string config;
        std::optional<std::uint64_t> seed;
        std::optional<int> workers;
        std::optional<std::string> out;
    } flags;
    std::vector<std::pair<CLI::App*, int (*)(const ExperimentConfig&)>> commands;
    auto add = [&](const char* name, const char* help, int (*fn)(const ExperimentConfig&)) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "JSON experiment config")->required();
        sub->add_option("--seed", flags.seed, "override run.seed");
        sub->add_option("--workers", flags.workers, "override run.workers")->check(CLI::PositiveNumber);
        sub->add_option("--out", flags.out, "override output.dir");
        commands.emplace_back(sub, fn);
    };
    add("simulate", "run one chain: epochs.csv, summary.json", cmd_simulate);
    add("sweep-alpha", "load sweep and alpha fit: sweep.csv, result.json", cmd_sweep_alpha);
    add("verify", "Monte-Carlo lemma checks: verify.json", cmd_verify);
    add("trace", "slot-level trace of a few cycles: trace.csv", cmd_trace);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }
    try {
        ExperimentConfig cfg = load_config(flags.config);
        if (flags.seed) {
            cfg.run.seed = *flags.seed;
        }
        if (flags.workers) {
            cfg.run.workers = *flags.workers;
        }
        if (flags.out) {
            cfg.out_dir = *flags.out;
        }
        for (const auto& [sub, fn] : commands) {
            if (sub->parsed()) {
                return fn(cfg);
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const SizeGuardError& e) {
        std::cerr << "size guard: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kRuntimeError;
}

}  // namespace linger::cli
