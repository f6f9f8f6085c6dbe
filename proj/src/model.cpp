#include "linger/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace linger {

namespace {

constexpr std::size_t kPsiTable = 4096;

}  // namespace

Beta::Beta(double value) : value_(value)
{
    if (!(value > 0.0)) {
        throw ParameterError("beta must be positive");
    }
}

std::string Beta::to_string() const
{
    if (is_infinite()) {
        return "inf";
    }
    std::ostringstream out;
    out << value_;
    return out.str();
}

double psi(std::uint64_t a, Beta beta) noexcept
{
    if (a == 0) {
        return 1.0;
    }
    if (beta.is_infinite()) {
        return 0.0;
    }
    return std::pow(1.0 + static_cast<double>(a), -beta.value());
}

Model::Model(const ModelParams& params) : params_(params), xi_(params.xi), zeta_(params.zeta)
{
    if (params.R < 2) {
        throw ParameterError("R must be at least 2");
    }
    psi_table_.resize(kPsiTable);
    for (std::size_t a = 0; a < kPsiTable; ++a) {
        psi_table_[a] = linger::psi(a, params.beta);
    }
}

SystemState SystemState::zeros(int R)
{
    const auto n = static_cast<std::size_t>(R);
    return {std::vector<std::uint64_t>(n, 0), std::vector<std::uint64_t>(n, 0)};
}

std::uint64_t SystemState::active_total() const noexcept
{
    return std::accumulate(active.begin(), active.end(), std::uint64_t{0});
}

std::uint64_t SystemState::inactive_total() const noexcept
{
    return std::accumulate(inactive.begin(), inactive.end(), std::uint64_t{0});
}

std::optional<std::uint64_t> CycleRecord::tau_min() const noexcept
{
    const auto r = first_emptied();
    if (!r) {
        return std::nullopt;
    }
    return tau[static_cast<std::size_t>(*r)];
}

std::optional<int> CycleRecord::first_emptied() const noexcept
{
    std::optional<int> best;
    for (std::size_t r = 0; r < tau.size(); ++r) {
        if (tau[r] && (!best || *tau[r] < *tau[static_cast<std::size_t>(*best)])) {
            best = static_cast<int>(r);
        }
    }
    return best;
}

ChainStreams::ChainStreams(std::uint64_t master_seed, std::uint64_t chain_id, int R) : chain_id_(chain_id)
{
    for (int r = 0; r < R; ++r) {
        const auto base = 4 * static_cast<std::uint64_t>(r);
        active_.push_back({RngStream(master_seed, derive_stream_id(chain_id, base)),
                           RngStream(master_seed, derive_stream_id(chain_id, base + 1)),
                           RngStream(master_seed, derive_stream_id(chain_id, base + 2))});
        inactive_.emplace_back(master_seed, derive_stream_id(chain_id, base + 3));
    }
}

SlotOutcome active_slot_step(std::uint64_t a, const Model& model, ActiveStreams& streams)
{
    const std::uint64_t xi_draw = model.xi().sample(streams.xi);
    const double u = model.beta().is_infinite() ? 0.0 : streams.coin.uniform();
    return apply_active_slot(a, xi_draw, u, model, [&] { return model.zeta().sample(streams.jump); });
}

CycleRecord run_cycle(std::span<const std::uint64_t> a0, const Model& model, ChainStreams& streams,
                      const CycleOptions& options)
{
    const int R = model.R();
    if (a0.size() != static_cast<std::size_t>(R)) {
        throw ParameterError("initial active vector must have length R");
    }
    const auto n = static_cast<std::size_t>(R);
    const bool infinite = model.beta().is_infinite();

    CycleRecord rec;
    rec.tau.assign(n, std::nullopt);
    rec.a_final.assign(a0.begin(), a0.end());
    rec.s_final.assign(n, 0);
    rec.idle_slots.assign(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        if (a0[r] == 0) {
            rec.tau[r] = 0;
        }
    }

    const bool all_empty = std::all_of(a0.begin(), a0.end(), [](std::uint64_t a) { return a == 0; });
    std::uint64_t slot = 0;
    if (!(infinite && all_empty) || options.min_one_slot) {
        std::vector<std::uint64_t>& A = rec.a_final;
        for (;;) {
            if (slot >= options.max_slots) {
                rec.t_star = slot;
                throw DivergedCycleError("cycle exceeded " + std::to_string(options.max_slots) + " slots", rec);
            }
            ++slot;
            bool all_released = true;
            for (std::size_t r = 0; r < n; ++r) {
                ActiveStreams& st = streams.active(static_cast<int>(r));
                const std::uint64_t a = A[r];
                const std::uint64_t xi_draw = model.xi().sample(st.xi);
                const double u = infinite ? 0.0 : st.coin.uniform();
                const SlotOutcome out =
                    apply_active_slot(a, xi_draw, u, model, [&] { return model.zeta().sample(st.jump); });
                if (a == 0) {
                    ++rec.idle_slots[r];
                }
                A[r] = out.a_next;
                if (out.a_next == 0 && !rec.tau[r]) {
                    rec.tau[r] = slot;
                }
                rec.release_events += out.released ? 1 : 0;
                all_released = all_released && out.released;
                if (options.observer) {
                    options.observer->on_active_slot(
                        {slot, static_cast<int>(r), a, xi_draw, out.released, out.zeta_added, out.a_next});
                }
            }
            if (options.per_slot_inactive) {
                for (std::size_t r = 0; r < n; ++r) {
                    const std::uint64_t arrivals = model.xi().sample(streams.inactive(static_cast<int>(r)));
                    rec.s_final[r] += arrivals;
                    if (options.observer) {
                        options.observer->on_inactive_slot(slot, static_cast<int>(r), arrivals);
                    }
                }
            }
            if (options.observer) {
                options.observer->on_slot_end(slot, all_released);
            }
            if (all_released) {
                break;
            }
        }
    }
    rec.t_star = slot;

    if (!options.per_slot_inactive) {
        for (std::size_t r = 0; r < n; ++r) {
            rec.s_final[r] = model.xi().sample_sum(slot, streams.inactive(static_cast<int>(r)));
        }
    }
    if (std::all_of(rec.tau.begin(), rec.tau.end(), [](const auto& t) { return t.has_value(); })) {
        std::uint64_t m = 0;
        for (const auto& t : rec.tau) {
            m = std::max(m, *t);
        }
        rec.tau_max = m;
    }
    return rec;
}

SystemState embedded_step(const SystemState& q, const Model& model, ChainStreams& streams, CycleRecord& record,
                          const CycleOptions& options)
{
    if (q.inactive.size() != static_cast<std::size_t>(model.R())) {
        throw ParameterError("inactive vector must have length R");
    }
    if (q.total() == 0) {
        CycleOptions idle = options;
        idle.min_one_slot = true;
        record = run_cycle(q.active, model, streams, idle);
    } else {
        record = run_cycle(q.active, model, streams, options);
    }
    SystemState next;
    next.active.resize(q.inactive.size());
    for (std::size_t r = 0; r < q.inactive.size(); ++r) {
        next.active[r] = q.inactive[r] + record.s_final[r];
    }
    next.inactive = record.a_final;
    return next;
}

SystemState run_chain(const SystemState& q0, std::uint64_t n_switches, const Model& model, ChainStreams& streams,
                      const EpochSink& sink, const CycleOptions& options,
                      const std::function<bool(const SystemState&)>& stop)
{
    if (n_switches < 1) {
        throw ParameterError("run_chain needs at least one switch");
    }
    SystemState q = q0;
    CycleRecord rec;
    for (std::uint64_t k = 0; k < n_switches; ++k) {
        SystemState next;
        try {
            next = embedded_step(q, model, streams, rec, options);
        } catch (const DivergedCycleError& e) {
            throw DivergedCycleError(std::string(e.what()) + " at epoch " + std::to_string(k), e.partial(), k);
        }
        if (sink) {
            sink(k, q, rec);
        }
        q = std::move(next);
        if (stop && stop(q)) {
            break;
        }
    }
    return q;
}

}  // namespace linger
