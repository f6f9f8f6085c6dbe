// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "linger/estimators.hpp"
#include "linger/oracles.hpp"
#include "linger/regression.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

using namespace linger;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = LINGER_CONFIG_DIR;
const fs::path kScratch = fs::temp_directory_path() / "linger_acceptance";
const int kWorkers = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail)
{
    std::printf("criterion %2d %s  %s: %s\n", id, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs a CLI command on a shipped config with the output redirected.
int run_shipped(int (*cmd)(const cli::ExperimentConfig&), const char* config, const fs::path& out)
{
    cli::ExperimentConfig cfg = cli::load_config((kConfigs / config).string());
    cfg.out_dir = out.string();
    cfg.run.workers = kWorkers;
    return cmd(cfg);
}

Model make(Beta beta, double rho)
{
    ModelParams p;
    p.R = 2;
    p.beta = beta;
    p.xi = geometric_xi_for_load(rho);
    return Model(p);
}

// Criteria 1 and 2: configs/simulate.json is R = beta = 2 at rho = 0.99.
void stationary_mean_at_099()
{
    const fs::path out = kScratch / "simulate";
    const int code = run_shipped(cli::cmd_simulate, "simulate.json", out);
    const json s = json::parse(slurp(out / "summary.json"));
    if (code != cli::kOk || s["stationary_mean"].is_null()) {
        report(1, false, "stationary mean at rho=0.99", "simulate failed");
        report(2, false, "F(0.99, 2)", "simulate failed");
        return;
    }
    const double mean = s["stationary_mean"]["mean"].get<double>();
    const double ci = s["stationary_mean"]["ci_half_width"].get<double>();
    const auto post = s["stationary_mean"]["n_epochs"].get<std::uint64_t>() -
                      s["stationary_mean"]["burn_in"].get<std::uint64_t>();
    report(1, mean >= 4000 && mean <= 5400 && post >= 20'000, "stationary mean at rho=0.99",
           fmt("%.1f +- %.1f over %llu post-burn-in epochs, target [4000, 5400]", mean, ci, (unsigned long long)post));
    const double F = s["F"].get<double>();
    report(2, std::abs(F - 1.84) <= 0.04, "F(0.99, 2)", fmt("%.4f, target 1.84 +- 0.04", F));
}

// Criterion 3 through the sweep-alpha command on configs/sweep.json.
void alpha_at_2()
{
    const fs::path out = kScratch / "sweep";
    const int code = run_shipped(cli::cmd_sweep_alpha, "sweep.json", out);
    const json r = json::parse(slurp(out / "result.json"));
    if (code != cli::kOk || r["alpha_hat"].is_null()) {
        report(3, false, "alpha(2) regression", "sweep or fit failed");
        return;
    }
    const double a = r["alpha_hat"].get<double>();
    report(3, a >= 1.90 && a <= 2.10, "alpha(2) regression",
           fmt("alpha_hat %.4f (window from %d), target [1.90, 2.10]", a, r["window_start"].get<int>()));
}

std::optional<RegressionResult> sweep(Beta beta, double x_hi, std::uint64_t epochs, std::string& error)
{
    SweepOptions opt;
    opt.beta = beta;
    opt.rho_grid = rho_grid_for_x(2.0, x_hi, 10);
    opt.epochs_per_point = epochs;
    opt.seed = 1;
    opt.workers = kWorkers;
    const SweepOutcome o = sweep_alpha(opt);
    error = o.fit_error;
    return o.fit;
}

void alpha_plateau()
{
    std::string detail;
    bool ok = true;
    for (double b : {1.6, 5.0}) {
        std::string error;
        const auto fit = sweep(Beta(b), 5.3, 20'000, error);
        if (!fit) {
            ok = false;
            detail += fmt("beta %.1f: %s; ", b, error.c_str());
            continue;
        }
        ok = ok && fit->alpha_hat >= 1.88 && fit->alpha_hat <= 2.12;
        detail += fmt("beta %.1f -> %.4f; ", b, fit->alpha_hat);
    }
    report(4, ok, "alpha(beta) plateau", detail + "target [1.88, 2.12]");
}

void small_beta()
{
    // x_hi = 3.5 puts the top of the grid at rho = 0.970.
    std::string error;
    const auto fit = sweep(Beta(0.3), 3.5, 200'000, error);
    if (!fit) {
        report(5, false, "small-beta law", error);
        return;
    }
    const double p = 0.3 * fit->alpha_hat;
    report(5, p >= 0.90 && p <= 1.10, "small-beta law",
           fmt("beta*alpha_hat = 0.3 * %.4f = %.4f, target [0.90, 1.10]", fit->alpha_hat, p));
}

// Criterion 6: configs/transient.json is rho = 1.01, rate fitted once |Q| > 1e5.
void transient_growth()
{
    const fs::path out = kScratch / "transient";
    run_shipped(cli::cmd_simulate, "transient.json", out);
    const json s = json::parse(slurp(out / "summary.json"));
    if (!s.contains("growth_rate") || s["growth_rate"].is_null()) {
        report(6, false, "transient growth rate", "no growth rate");
        return;
    }
    const double g = s["growth_rate"].get<double>();
    report(6, g >= 1.015 && g <= 1.025, "transient growth rate",
           fmt("%.5f (1.01/0.99 = %.5f), target [1.015, 1.025]", g, 1.01 / 0.99));
}

void lingering()
{
    const LingeringScaling r = lingering_scaling(make(Beta::infinite(), 0.9), {100, 1000, 10'000, 100'000}, 1000, 1,
                                                 kWorkers);
    std::string detail;
    for (const auto& p : r.points) {
        detail += fmt("a=%llu gap %.1f; ", (unsigned long long)p.a, p.mean_gap);
    }
    report(7, r.slope >= 0.40 && r.slope <= 0.60, "lingering square-root law",
           detail + fmt("slope %.4f +- %.4f, target [0.40, 0.60]", r.slope, r.slope_stderr));
}

void stationarity()
{
    const Model m = make(Beta::infinite(), 0.9);
    ChainStreams streams(1, 0, 2);
    std::vector<double> active;
    std::vector<double> t_star;
    const std::uint64_t n = 200'000;
    const SystemState last =
        run_chain(SystemState::zeros(2), n, m, streams, [&](std::uint64_t, const SystemState& q, const CycleRecord& r) {
            active.push_back(double(q.active_total()));
            t_star.push_back(double(r.t_star));
        });
    active.push_back(double(last.active_total()));
    const StationarityCheck s = check_stationarity_identity(active, t_star, 2, m.xi().mean(), default_burn_in(n));
    report(8, s.lhs > 0.0 && std::abs(s.z_score) <= 3.0, "stationarity identity",
           fmt("E A_1 = %.4f, E xi E T* = %.4f, z = %.2f, target |z| <= 3", s.lhs, s.rhs, s.z_score));
}

void lemma_suite()
{
    const BoundSuiteResult bm = verify_bound_suite(100, 10'000, 1, false, kWorkers);
    const BoundSuiteResult bs = verify_bound_suite(20, 10'000, 2, true, kWorkers);
    const std::vector<std::vector<std::uint64_t>> grid{{100, 100}, {1000, 1000}, {10'000, 10'000}};
    bool gap_ok = true;
    std::string gap;
    for (double rho : {0.5, 0.9}) {
        const TStarGapResult g = verify_tstar_gap(grid, make(Beta::infinite(), rho), 1000, 3, kWorkers);
        gap_ok = gap_ok && g.no_growth;
        gap += fmt("rho %.1f slope %.3f (guard %.3f); ", rho, g.slope, kGuardSigmas * g.slope_stderr);
    }
    bool hit_ok = true;
    std::string hit;
    for (std::uint64_t a : {1ULL, 10ULL, 100ULL}) {
        RngStream rng(4, a);
        const HittingTimeCheck h = hitting_time_check(a, geometric_xi_for_load(0.9), 20'000, rng);
        hit_ok = hit_ok && h.satisfied;
        hit += fmt("a=%llu z %.2f; ", (unsigned long long)a, h.z_score);
    }
    const bool ok = bm.violations == 0 && bs.violations == 0 && gap_ok && hit_ok;
    report(9, ok, "lemma suite",
           fmt("bound_max %d/100 violations; bound_max_sqrt %d/20 violations; ", bm.violations, bs.violations) + gap +
               hit);
}

void conditioned_walk()
{
    const ReleaseCountResult r = release_count_distribution(Beta(2.0), 500, 100'000, geometric_xi_for_load(0.9), 1,
                                                            kWorkers);
    bool decreasing = true;
    for (std::size_t k = 1; k < r.tail.size(); ++k) {
        decreasing = decreasing && r.tail[k] <= r.tail[k - 1];
    }
    const bool counts_ok = r.p_zero - kGuardSigmas * r.p_zero_stderr > 0.0 && decreasing && !r.inconclusive;
    const TailEstimate t = tail_exponent_B(Beta(2.0), 2000, 20'000, geometric_xi_for_load(0.9), 2, kWorkers);
    const bool tail_ok = std::abs(t.exponent_hat - 2.0) <= 0.3;
    report(10, counts_ok && tail_ok, "conditioned walk",
           fmt("P(N=0) %.4f +- %.4f, P(N>%zu) %.2e, horizon gap %.4f (tol %.2f); B tail exponent %.3f +- %.3f, "
               "target 2.0 +- 0.3",
               r.p_zero, r.p_zero_stderr, r.tail.size() - 1, r.tail.back(), r.max_horizon_gap, r.tolerance,
               t.exponent_hat, t.stderr));
}

void a_scaling()
{
    const AScalingResult r = scaling_of_A_at_Tstar(make(Beta(1.2), 0.99), {100, 1000, 10'000}, 2000, 1, kWorkers);
    report(11, !r.degenerate && std::abs(r.slope - 0.4) <= 0.15, "A(T*) scaling at beta=1.2",
           fmt("slope %.4f +- %.4f, target 0.40 +- 0.15", r.slope, r.slope_stderr));
}

int run_cli(const std::string& command, const fs::path& config, const fs::path& out, int workers)
{
    std::vector<std::string> args{"linger", command, "--config", config.string(), "--workers",
                                  std::to_string(workers), "--out", out.string()};
    std::vector<char*> argv;
    for (auto& a : args) {
        argv.push_back(a.data());
    }
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

void determinism()
{
    struct Case {
        const char* command;
        const char* config;
        std::vector<const char*> files;
    };
    const std::vector<Case> cases{
        {"simulate",
         R"({"schema_version": 1, "model": {"beta": 2}, "run": {"rho": 0.95, "n_epochs": 5000, "seed": 9}})",
         {"epochs.csv", "summary.json"}},
        {"sweep-alpha",
         R"({"schema_version": 1, "model": {"beta": 2},
             "run": {"rho_grid": {"x_lo": 1.0, "x_hi": 3.0, "n": 8}, "n_epochs": 3000, "seed": 9}})",
         {"sweep.csv", "result.json"}},
        {"verify",
         R"({"schema_version": 1, "run": {"seed": 9}, "verify": [
             {"check": "bound_max_suite", "instances": 10},
             {"check": "tstar_gap", "scales": [10, 100], "n_per_state": 300},
             {"check": "local_times", "horizon": 300, "n_paths": 3000},
             {"check": "release_count", "horizon": 100, "n_samples": 3000, "tolerance": 1},
             {"check": "a_scaling", "a1_grid": [10, 100], "n_samples": 300}]})",
         {"verify.json"}},
        {"trace",
         R"({"schema_version": 1, "model": {"beta": 2}, "run": {"rho": 0.9, "seed": 9},
             "trace": {"skip_cycles": 50, "cycles": 5}})",
         {"trace.csv"}},
    };
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        const fs::path dir = kScratch / "determinism" / c.command;
        fs::create_directories(dir);
        const fs::path cfg = dir / "config.json";
        std::ofstream(cfg) << c.config;
        bool same = true;
        std::vector<std::string> reference;
        for (int workers : {1, 3, 4}) {
            for (int rep = 0; rep < (workers == 1 ? 2 : 1); ++rep) {
                const fs::path out = dir / fmt("w%d_r%d", workers, rep);
                const int code = run_cli(c.command, cfg, out, workers);
                same = same && (code == cli::kOk || code == cli::kCheckFailed || code == cli::kInconclusive);
                for (std::size_t i = 0; i < c.files.size(); ++i) {
                    const std::string bytes = slurp(out / c.files[i]);
                    same = same && !bytes.empty();
                    if (reference.size() <= i) {
                        reference.push_back(bytes);
                    } else {
                        same = same && bytes == reference[i];
                    }
                }
            }
        }
        ok = ok && same;
        detail += fmt("%s %s; ", c.command, same ? "identical" : "DIFFERS");
    }
    report(12, ok, "determinism", detail + "re-run and workers 1, 3, 4");
}

}  // namespace

int main()
{
    fs::remove_all(kScratch);
    fs::create_directories(kScratch);
    const auto t0 = std::chrono::steady_clock::now();
    stationary_mean_at_099();
    alpha_at_2();
    alpha_plateau();
    small_beta();
    transient_growth();
    lingering();
    stationarity();
    lemma_suite();
    conditioned_walk();
    a_scaling();
    determinism();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d of 12 criteria failed (%.0f s)\n", failures, secs);
    return failures == 0 ? 0 : 1;
}
