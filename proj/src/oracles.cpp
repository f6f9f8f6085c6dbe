#include "linger/oracles.hpp"

#include "linger/errors.hpp"
#include "linger/parallel.hpp"
#include "linger/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace linger {

namespace {

constexpr std::uint64_t kGapTag = 0x474150ULL;
constexpr std::uint64_t kWalkTag = 0x57414C4BULL;
constexpr std::uint64_t kReleaseTag = 0x52454CULL;
constexpr std::uint64_t kTailTag = 0x5441494CULL;
constexpr std::uint64_t kScaleTag = 0x5343414CULL;
constexpr std::uint64_t kDriftTag = 0x445249ULL;
constexpr std::uint64_t kSuiteTag = 0x5355495445ULL;
constexpr std::uint64_t kLingerTag = 0x4C494E47ULL;

// Work is split into a fixed number of chunks, each with its own stream, so
// results do not depend on the worker count.
constexpr std::size_t kChunks = 16;

std::uint64_t chunk_size(std::uint64_t n, std::size_t chunk)
{
    return n / kChunks + (chunk < n % kChunks ? 1 : 0);
}

std::uint64_t max_norm(std::span<const std::uint64_t> x)
{
    return x.empty() ? 0 : *std::max_element(x.begin(), x.end());
}

void require_samples(std::uint64_t n, std::uint64_t minimum, const char* what)
{
    if (n < minimum) {
        throw ParameterError(std::string(what) + " needs at least " + std::to_string(minimum) + " samples");
    }
}

// Model used only for its release test: psi table plus pow() fallback.
Model release_model(Beta beta, const DistributionSpec& xi)
{
    ModelParams p;
    p.R = 2;
    p.beta = beta;
    p.xi = xi;
    p.zeta = DistributionSpec::point_mass(0);
    return Model(p);
}

void check_positive_drift(const Distribution& xi)
{
    if (!(1.0 - xi.mean() > 0.0)) {
        throw ParameterError("conditioned walk needs E(1 - xi) > 0");
    }
}

}  // namespace

WalkSpec WalkSpec::from_distribution(const DistributionSpec& steps)
{
    const Moments m = Distribution(steps).moments();
    return {Kind::distribution, steps, m.mean, m.variance};
}

WalkSpec WalkSpec::hitting_time(const DistributionSpec& xi)
{
    const Moments m = Distribution(xi).moments();
    if (!(m.mean < 1.0)) {
        throw ParameterError("hitting-time steps need E(xi) < 1");
    }
    const double gap = 1.0 - m.mean;
    return {Kind::hitting_time, xi, 1.0 / gap, m.variance / (gap * gap * gap)};
}

WalkSampler::WalkSampler(const WalkSpec& spec) : spec_(spec), law_(spec.law)
{
}

std::uint64_t WalkSampler::sample(std::uint64_t x, RngStream& rng) const
{
    if (spec_.kind == WalkSpec::Kind::distribution) {
        return law_.sample_sum(x, rng);
    }
    // Time for the walk with increments xi - 1 to fall from x to 0; it is
    // skip-free downwards so it lands on 0 exactly.
    std::uint64_t level = x;
    std::uint64_t t = 0;
    while (level > 0) {
        level = level + law_.sample(rng) - 1;
        ++t;
    }
    return t;
}

BoundCheck verify_bound_max(std::span<const std::uint64_t> x, const WalkSpec& spec, std::uint64_t n_samples,
                            RngStream& rng)
{
    require_samples(n_samples, 10'000, "verify_bound_max");
    if (x.empty()) {
        throw ParameterError("verify_bound_max needs at least one walk");
    }
    const WalkSampler sampler(spec);
    RunningStats stats;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        std::uint64_t m = 0;
        for (auto xr : x) {
            m = std::max(m, sampler.sample(xr, rng));
        }
        stats.add(static_cast<double>(m));
    }
    const double xinf = static_cast<double>(max_norm(x));
    BoundCheck out;
    out.empirical = stats.mean();
    out.stderr = stats.stderr_of_mean();
    out.bound = spec.step_mean * xinf + static_cast<double>(x.size()) * std::sqrt(spec.step_variance * xinf);
    out.satisfied = out.empirical <= out.bound + kGuardSigmas * out.stderr;
    out.n_samples = n_samples;
    return out;
}

BoundCheck verify_bound_max_sqrt(std::span<const std::uint64_t> x, const WalkSpec& spec, std::uint64_t n_samples,
                                 RngStream& rng)
{
    require_samples(n_samples, 10'000, "verify_bound_max_sqrt");
    if (!(spec.step_mean > 0.0)) {
        throw ParameterError("verify_bound_max_sqrt needs a positive step mean");
    }
    const std::uint64_t xmax = max_norm(x);
    if (xmax == 0) {
        throw ParameterError("verify_bound_max_sqrt needs |x|_inf >= 1");
    }
    const WalkSampler sampler(spec);
    RunningStats stats;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        std::uint64_t m = 0;
        for (auto xr : x) {
            m = std::max(m, sampler.sample(xr, rng));
        }
        stats.add(std::sqrt(static_cast<double>(m)));
    }
    const double xinf = static_cast<double>(xmax);
    const double mean = spec.step_mean;
    BoundCheck out;
    out.empirical = stats.mean();
    out.stderr = stats.stderr_of_mean();
    out.bound = std::sqrt(mean * xinf) - spec.step_variance / std::pow(mean, 1.5) / std::sqrt(xinf);
    out.satisfied = out.empirical + kGuardSigmas * out.stderr >= out.bound;
    out.n_samples = n_samples;
    return out;
}

TStarGapResult verify_tstar_gap(const std::vector<std::vector<std::uint64_t>>& grid, const Model& model,
                                std::uint64_t n_per_state, std::uint64_t seed, int workers)
{
    if (!model.beta().is_infinite()) {
        throw ParameterError("verify_tstar_gap requires beta = infinity");
    }
    if (n_per_state < 2) {
        throw ParameterError("verify_tstar_gap needs at least 2 samples per state");
    }
    TStarGapResult out;
    out.states = parallel_map(grid.size(), workers, [&](std::size_t i) {
        ChainStreams streams(seed, derive_stream_id(kGapTag, i), model.R());
        RunningStats stats;
        for (std::uint64_t s = 0; s < n_per_state; ++s) {
            const CycleRecord rec = run_cycle(grid[i], model, streams);
            stats.add(static_cast<double>(rec.t_star - *rec.tau_max));
        }
        return GapAtState{grid[i], stats.mean(), stats.stderr_of_mean()};
    });

    std::vector<double> log_norm;
    std::vector<double> means;
    std::vector<double> errs;
    for (const auto& s : out.states) {
        out.max_mean_gap = std::max(out.max_mean_gap, s.mean_gap);
        const std::uint64_t norm = max_norm(s.a);
        if (norm >= 1) {
            log_norm.push_back(std::log(static_cast<double>(norm)));
            means.push_back(s.mean_gap);
            errs.push_back(s.stderr);
        }
    }
    const bool distinct = log_norm.size() >= 2 &&
                          std::any_of(log_norm.begin(), log_norm.end(), [&](double v) { return v != log_norm[0]; });
    if (distinct) {
        out.slope = fit_line(log_norm, means).slope;
        out.slope_stderr = propagated_slope_stderr(log_norm, errs);
        out.no_growth = out.slope <= kGuardSigmas * out.slope_stderr;
    }
    return out;
}

HittingTimeCheck hitting_time_check(std::uint64_t a, const DistributionSpec& xi, std::uint64_t n_samples,
                                    RngStream& rng)
{
    require_samples(n_samples, 2, "hitting_time_check");
    ModelParams params;
    params.R = 2;
    params.beta = Beta::infinite();
    params.xi = xi;
    params.zeta = DistributionSpec::point_mass(0);
    const Model model(params);
    if (!(model.xi().mean() < 1.0)) {
        throw ParameterError("hitting times need E(xi) < 1");
    }
    ActiveStreams streams{rng.child(0), rng.child(1), rng.child(2)};
    RunningStats stats;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        std::uint64_t level = a;
        std::uint64_t t = 0;
        while (level > 0) {
            level = active_slot_step(level, model, streams).a_next;
            ++t;
        }
        stats.add(static_cast<double>(t));
    }
    HittingTimeCheck out;
    out.a = a;
    out.mean = stats.mean();
    out.stderr = stats.stderr_of_mean();
    out.expected = static_cast<double>(a) / (1.0 - model.xi().mean());
    if (out.stderr > 0.0) {
        out.z_score = (out.mean - out.expected) / out.stderr;
    } else {
        out.z_score = out.mean == out.expected ? 0.0 : std::numeric_limits<double>::infinity();
    }
    out.satisfied = std::abs(out.z_score) <= kGuardSigmas;
    return out;
}

DriftEstimate estimate_drift(std::uint64_t a, const Model& model, std::uint64_t n_samples, RngStream& rng)
{
    if (a < 1) {
        throw ParameterError("estimate_drift needs a >= 1");
    }
    require_samples(n_samples, 2, "estimate_drift");
    ActiveStreams streams{rng.child(0), rng.child(1), rng.child(2)};
    RunningStats change;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        const SlotOutcome out = active_slot_step(a, model, streams);
        change.add(static_cast<double>(out.a_next) - static_cast<double>(a));
    }
    DriftEstimate est;
    est.two_delta = model.xi().mean() + change.mean();
    est.stderr = change.stderr_of_mean();
    est.heuristic = model.rho() - 1.0 + model.zeta().mean() * model.psi(a);
    return est;
}

DriftBracket bracket_drift_root(const Model& model, std::uint64_t a_lo, std::uint64_t a_hi, std::uint64_t n_samples,
                                std::uint64_t seed, double ratio)
{
    if (model.beta().is_infinite()) {
        throw ParameterError("the drift has no sign change for beta = infinity");
    }
    DriftBracket out;
    auto drift = [&](std::uint64_t a) {
        // Same stream for every level: common random numbers keep the
        // estimate monotone enough for bisection.
        RngStream rng(seed, kDriftTag);
        ++out.evaluations;
        return estimate_drift(a, model, n_samples, rng).two_delta;
    };
    if (!(drift(a_lo) > 0.0) || !(drift(a_hi) < 0.0)) {
        throw ParameterError("drift does not change sign on the initial bracket");
    }
    double lo = static_cast<double>(a_lo);
    double hi = static_cast<double>(a_hi);
    while (hi / lo > ratio && hi - lo > 1.0) {
        const auto mid = static_cast<std::uint64_t>(std::llround(std::sqrt(lo * hi)));
        if (drift(mid) > 0.0) {
            lo = static_cast<double>(mid);
        } else {
            hi = static_cast<double>(mid);
        }
    }
    out.lower = lo;
    out.upper = hi;
    const double z = model.zeta().mean();
    out.predicted = std::pow((1.0 - model.rho()) / z, -1.0 / model.beta().value()) - 1.0;
    return out;
}

ConditionedPath sample_conditioned_walk(std::uint64_t horizon, const Distribution& xi, RngStream& rng,
                                        std::uint64_t max_attempts)
{
    if (horizon < 1) {
        throw ParameterError("conditioned walk needs horizon >= 1");
    }
    check_positive_drift(xi);
    ConditionedPath out;
    out.path.assign(horizon + 1, 0);
    while (out.attempts < max_attempts) {
        ++out.attempts;
        std::int64_t w = 0;
        std::uint64_t k = 1;
        for (; k <= horizon; ++k) {
            w += 1 - static_cast<std::int64_t>(xi.sample(rng));
            if (w <= 0) {
                break;
            }
            out.path[k] = w;
        }
        if (k > horizon) {
            return out;
        }
    }
    throw ParameterError("conditioned walk acceptance rate below 1/" + std::to_string(max_attempts));
}

LocalTimeProfile conditioned_local_times(std::uint64_t horizon, const DistributionSpec& xi_spec, int max_level,
                                         std::uint64_t n_paths, std::uint64_t seed, int workers)
{
    const Distribution xi(xi_spec);
    check_positive_drift(xi);
    const auto levels = static_cast<std::size_t>(max_level + 1);
    struct Chunk {
        std::vector<RunningStats> per_level;
        std::uint64_t attempts = 0;
        std::uint64_t accepted = 0;
    };
    const auto chunks = parallel_map(kChunks, workers, [&](std::size_t c) {
        Chunk out;
        out.per_level.resize(levels);
        RngStream rng(seed, derive_stream_id(kWalkTag, c));
        std::vector<double> visits(levels);
        for (std::uint64_t i = 0; i < chunk_size(n_paths, c); ++i) {
            const ConditionedPath p = sample_conditioned_walk(horizon, xi, rng);
            out.attempts += p.attempts;
            ++out.accepted;
            std::fill(visits.begin(), visits.end(), 0.0);
            for (auto w : p.path) {
                if (w >= 0 && static_cast<std::size_t>(w) < levels) {
                    visits[static_cast<std::size_t>(w)] += 1.0;
                }
            }
            for (std::size_t a = 0; a < levels; ++a) {
                out.per_level[a].add(visits[a]);
            }
        }
        return out;
    });
    std::vector<RunningStats> merged(levels);
    std::uint64_t attempts = 0;
    std::uint64_t accepted = 0;
    for (const auto& c : chunks) {
        for (std::size_t a = 0; a < levels; ++a) {
            merged[a].merge(c.per_level[a]);
        }
        attempts += c.attempts;
        accepted += c.accepted;
    }
    LocalTimeProfile out;
    for (const auto& s : merged) {
        out.mean.push_back(s.mean());
        out.stderr.push_back(s.stderr_of_mean());
        out.supremum = std::max(out.supremum, s.mean());
    }
    out.n_paths = accepted;
    out.acceptance_rate = attempts > 0 ? static_cast<double>(accepted) / static_cast<double>(attempts) : 0.0;
    return out;
}

namespace {

struct ReleaseCounts {
    std::vector<std::uint64_t> histogram;
    std::uint64_t attempts = 0;
    std::uint64_t accepted = 0;
};

ReleaseCounts count_releases(Beta beta, std::uint64_t horizon, std::uint64_t n_samples, const DistributionSpec& xi_spec,
                             std::uint64_t seed, int workers, int max_n)
{
    const Distribution xi(xi_spec);
    check_positive_drift(xi);
    const Model model = release_model(beta, xi_spec);
    const auto bins = static_cast<std::size_t>(max_n + 2);
    const auto chunks = parallel_map(kChunks, workers, [&](std::size_t c) {
        ReleaseCounts out;
        out.histogram.assign(bins, 0);
        RngStream walk(seed, derive_stream_id(kReleaseTag, 2 * c));
        RngStream coin(seed, derive_stream_id(kReleaseTag, 2 * c + 1));
        for (std::uint64_t i = 0; i < chunk_size(n_samples, c); ++i) {
            const ConditionedPath p = sample_conditioned_walk(horizon, xi, walk);
            out.attempts += p.attempts;
            ++out.accepted;
            std::uint64_t n = 0;
            for (std::uint64_t k = 1; k <= horizon; ++k) {
                n += model.releases(static_cast<std::uint64_t>(p.path[k]), coin.uniform()) ? 1 : 0;
            }
            ++out.histogram[std::min<std::size_t>(n, bins - 1)];
        }
        return out;
    });
    ReleaseCounts total;
    total.histogram.assign(bins, 0);
    for (const auto& c : chunks) {
        for (std::size_t b = 0; b < bins; ++b) {
            total.histogram[b] += c.histogram[b];
        }
        total.attempts += c.attempts;
        total.accepted += c.accepted;
    }
    return total;
}

std::vector<double> tail_probabilities(const std::vector<std::uint64_t>& histogram, std::uint64_t n, int max_n)
{
    std::vector<double> tail;
    std::uint64_t at_most = 0;
    for (int k = 0; k <= max_n; ++k) {
        at_most += histogram[static_cast<std::size_t>(k)];
        tail.push_back(1.0 - static_cast<double>(at_most) / static_cast<double>(n));
    }
    return tail;
}

}  // namespace

ReleaseCountResult release_count_distribution(Beta beta, std::uint64_t horizon, std::uint64_t n_samples,
                                              const DistributionSpec& xi, std::uint64_t seed, int workers, int max_n,
                                              double tolerance)
{
    if (!(beta.value() > 1.0)) {
        throw ParameterError("release counts are finite only for beta > 1");
    }
    require_samples(n_samples, 1, "release_count_distribution");
    const ReleaseCounts base = count_releases(beta, horizon, n_samples, xi, seed, workers, max_n);
    const ReleaseCounts doubled = count_releases(beta, 2 * horizon, n_samples, xi, seed, workers, max_n);

    ReleaseCountResult out;
    out.horizon = horizon;
    out.n_samples = n_samples;
    out.histogram = base.histogram;
    const double n = static_cast<double>(n_samples);
    out.p_zero = static_cast<double>(base.histogram[0]) / n;
    out.p_zero_stderr = std::sqrt(out.p_zero * (1.0 - out.p_zero) / n);
    out.tail = tail_probabilities(base.histogram, n_samples, max_n);
    out.tail_2h = tail_probabilities(doubled.histogram, n_samples, max_n);
    for (std::size_t k = 0; k < out.tail.size(); ++k) {
        out.max_horizon_gap = std::max(out.max_horizon_gap, std::abs(out.tail[k] - out.tail_2h[k]));
    }
    out.tolerance = tolerance;
    out.inconclusive = out.max_horizon_gap > tolerance;
    out.acceptance_rate = static_cast<double>(base.accepted) / static_cast<double>(base.attempts);
    return out;
}

TailEstimate tail_exponent_B(Beta beta, std::uint64_t horizon, std::uint64_t n_samples, const DistributionSpec& xi_spec,
                             std::uint64_t seed, int workers, std::uint64_t k_min, std::uint64_t min_bin_count)
{
    if (beta.is_infinite() || !(beta.value() > 1.0 && beta.value() <= 2.0)) {
        throw ParameterError("tail_exponent_B expects beta in (1, 2]");
    }
    if (k_min < 1 || horizon <= 2 * k_min) {
        throw ParameterError("tail_exponent_B needs 1 <= k_min < horizon / 2");
    }
    const Distribution xi(xi_spec);
    check_positive_drift(xi);
    const Model model = release_model(beta, xi_spec);

    // Log-spaced bins [edge_j, edge_{j+1}) covering [k_min, horizon].
    std::vector<std::uint64_t> edges{k_min};
    while (edges.back() <= horizon) {
        const auto next = static_cast<std::uint64_t>(std::ceil(static_cast<double>(edges.back()) * 1.5));
        edges.push_back(std::max(next, edges.back() + 1));
    }
    edges.back() = horizon + 1;
    const std::size_t n_bins = edges.size() - 1;

    struct Chunk {
        std::vector<std::uint64_t> counts;
        std::uint64_t finite = 0;
    };
    const auto chunks = parallel_map(kChunks, workers, [&](std::size_t c) {
        Chunk out;
        out.counts.assign(n_bins, 0);
        RngStream walk(seed, derive_stream_id(kTailTag, 2 * c));
        RngStream coin(seed, derive_stream_id(kTailTag, 2 * c + 1));
        for (std::uint64_t i = 0; i < chunk_size(n_samples, c); ++i) {
            const ConditionedPath p = sample_conditioned_walk(horizon, xi, walk);
            for (std::uint64_t k = 1; k <= horizon; ++k) {
                if (model.releases(static_cast<std::uint64_t>(p.path[k]), coin.uniform())) {
                    ++out.finite;
                    if (k >= k_min) {
                        const auto it = std::upper_bound(edges.begin(), edges.end(), k);
                        ++out.counts[static_cast<std::size_t>(it - edges.begin()) - 1];
                    }
                    break;
                }
            }
        }
        return out;
    });
    std::vector<std::uint64_t> counts(n_bins, 0);
    TailEstimate out;
    for (const auto& c : chunks) {
        for (std::size_t b = 0; b < n_bins; ++b) {
            counts[b] += c.counts[b];
        }
        out.n_finite += c.finite;
    }
    out.n_samples = n_samples;
    out.truncation_horizon = horizon;

    std::vector<double> log_k;
    std::vector<double> log_density;
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (counts[b] < min_bin_count) {
            continue;
        }
        const double lo = static_cast<double>(edges[b]);
        const double hi = static_cast<double>(edges[b + 1]);
        log_k.push_back(0.5 * (std::log(lo) + std::log(hi - 1.0)));
        log_density.push_back(std::log(static_cast<double>(counts[b]) / (hi - lo)));
    }
    if (log_k.size() < 3) {
        throw EstimationError("too few populated tail bins for B (" + std::to_string(log_k.size()) + ")");
    }
    const LineFit fit = fit_line(log_k, log_density);
    out.exponent_hat = -fit.slope;
    out.stderr = fit.slope_stderr;
    out.bins_used = static_cast<int>(log_k.size());
    return out;
}

AScalingResult scaling_of_A_at_Tstar(const Model& model, const std::vector<std::uint64_t>& a1_grid,
                                     std::uint64_t n_samples, std::uint64_t seed, int workers)
{
    AScalingResult out;
    if (model.beta().is_infinite()) {
        out.degenerate = true;
        for (auto a1 : a1_grid) {
            out.points.push_back({a1, 0.0, 0.0});
        }
        out.slope = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const std::size_t n_points = a1_grid.size();
    const auto stats = parallel_map(n_points * kChunks, workers, [&](std::size_t task) {
        const std::size_t point = task / kChunks;
        const std::size_t chunk = task % kChunks;
        ChainStreams streams(seed, derive_stream_id(kScaleTag, task), model.R());
        const std::vector<std::uint64_t> a0(static_cast<std::size_t>(model.R()), a1_grid[point]);
        RunningStats s;
        for (std::uint64_t i = 0; i < chunk_size(n_samples, chunk); ++i) {
            const CycleRecord rec = run_cycle(a0, model, streams);
            double sum = 0.0;
            for (auto v : rec.a_final) {
                sum += static_cast<double>(v);
            }
            s.add(sum / static_cast<double>(rec.a_final.size()));
        }
        return s;
    });
    std::vector<double> log_a;
    std::vector<double> log_mean;
    std::vector<double> log_err;
    for (std::size_t p = 0; p < n_points; ++p) {
        RunningStats merged;
        for (std::size_t c = 0; c < kChunks; ++c) {
            merged.merge(stats[p * kChunks + c]);
        }
        out.points.push_back({a1_grid[p], merged.mean(), merged.stderr_of_mean()});
        if (merged.mean() <= 0.0) {
            out.degenerate = true;
        } else {
            log_a.push_back(std::log(static_cast<double>(a1_grid[p])));
            log_mean.push_back(std::log(merged.mean()));
            log_err.push_back(merged.stderr_of_mean() / merged.mean());
        }
    }
    if (out.degenerate || log_a.size() < 2) {
        out.degenerate = true;
        out.slope = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.slope = fit_line(log_a, log_mean).slope;
    out.slope_stderr = propagated_slope_stderr(log_a, log_err);
    return out;
}

namespace {

BoundInstance random_instance(RngStream& rng, bool sqrt_form)
{
    auto uniform_int = [&](std::uint64_t lo, std::uint64_t hi) {
        return lo + static_cast<std::uint64_t>(rng.uniform() * static_cast<double>(hi - lo + 1));
    };
    BoundInstance inst;
    inst.x.resize(uniform_int(1, 4));
    for (auto& v : inst.x) {
        v = uniform_int(0, 200);
    }
    if (sqrt_form && max_norm(inst.x) == 0) {
        inst.x[0] = 1;
    }
    switch (uniform_int(0, 5)) {
    case 0:
        inst.spec = WalkSpec::from_distribution(DistributionSpec::geometric(0.2 + 0.75 * rng.uniform()));
        break;
    case 1:
        inst.spec = WalkSpec::from_distribution(DistributionSpec::poisson(0.1 + 2.9 * rng.uniform()));
        break;
    case 2:
        inst.spec = WalkSpec::from_distribution(
            DistributionSpec::bernoulli(0.05 + 0.9 * rng.uniform(), static_cast<double>(uniform_int(1, 3))));
        break;
    case 3:
        inst.spec = WalkSpec::from_distribution(DistributionSpec::point_mass(static_cast<double>(uniform_int(1, 3))));
        break;
    case 4:
        inst.spec = WalkSpec::hitting_time(geometric_xi_for_load(0.05 + 0.85 * rng.uniform()));
        break;
    default:
        inst.spec = WalkSpec::hitting_time(DistributionSpec::poisson(0.05 + 0.4 * rng.uniform()));
        break;
    }
    return inst;
}

}  // namespace

BoundSuiteResult verify_bound_suite(int n_instances, std::uint64_t n_samples, std::uint64_t seed, bool sqrt_form,
                                    int workers)
{
    BoundSuiteResult out;
    out.instances = parallel_map(static_cast<std::size_t>(n_instances), workers, [&](std::size_t i) {
        RngStream rng(seed, derive_stream_id(kSuiteTag, i));
        BoundInstance inst = random_instance(rng, sqrt_form);
        RngStream walks = rng.child(1);
        inst.check = sqrt_form ? verify_bound_max_sqrt(inst.x, inst.spec, n_samples, walks)
                               : verify_bound_max(inst.x, inst.spec, n_samples, walks);
        return inst;
    });
    for (const auto& inst : out.instances) {
        out.violations += inst.check.satisfied ? 0 : 1;
    }
    return out;
}

LingeringScaling lingering_scaling(const Model& model, const std::vector<std::uint64_t>& a_grid,
                                   std::uint64_t n_cycles, std::uint64_t seed, int workers)
{
    if (!model.beta().is_infinite()) {
        throw ParameterError("lingering_scaling requires beta = infinity");
    }
    if (a_grid.size() < 2 || n_cycles < 2) {
        throw ParameterError("lingering_scaling needs two start sizes and two cycles each");
    }
    const std::size_t n_points = a_grid.size();
    const auto stats = parallel_map(n_points * kChunks, workers, [&](std::size_t task) {
        const std::size_t point = task / kChunks;
        ChainStreams streams(seed, derive_stream_id(kLingerTag, task), model.R());
        const std::vector<std::uint64_t> a0(static_cast<std::size_t>(model.R()), a_grid[point]);
        RunningStats s;
        for (std::uint64_t i = 0; i < chunk_size(n_cycles, task % kChunks); ++i) {
            const CycleRecord rec = run_cycle(a0, model, streams);
            s.add(static_cast<double>(rec.t_star - *rec.tau_min()));
        }
        return s;
    });
    LingeringScaling out;
    std::vector<double> log_a;
    std::vector<double> log_gap;
    std::vector<double> log_err;
    for (std::size_t p = 0; p < n_points; ++p) {
        RunningStats merged;
        for (std::size_t c = 0; c < kChunks; ++c) {
            merged.merge(stats[p * kChunks + c]);
        }
        out.points.push_back({a_grid[p], merged.mean(), merged.stderr_of_mean()});
        if (!(merged.mean() > 0.0) || a_grid[p] == 0) {
            throw EstimationError("lingering gap is zero at a = " + std::to_string(a_grid[p]));
        }
        log_a.push_back(std::log(static_cast<double>(a_grid[p])));
        log_gap.push_back(std::log(merged.mean()));
        log_err.push_back(merged.stderr_of_mean() / merged.mean());
    }
    out.slope = fit_line(log_a, log_gap).slope;
    out.slope_stderr = propagated_slope_stderr(log_a, log_err);
    return out;
}

}  // namespace linger
