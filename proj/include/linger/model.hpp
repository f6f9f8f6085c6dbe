#pragma once

#include "linger/distributions.hpp"
#include "linger/errors.hpp"
#include "linger/rng.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace linger {

/// Aggressiveness parameter, possibly +infinity (release only when empty).
class Beta {
public:
    explicit Beta(double value);
    static Beta infinite() { return Beta(std::numeric_limits<double>::infinity()); }

    bool is_infinite() const noexcept { return value_ == std::numeric_limits<double>::infinity(); }
    double value() const noexcept { return value_; }
    std::string to_string() const;

    friend bool operator==(Beta, Beta) = default;

private:
    double value_;
};

/// Release probability (1+a)^-beta; the indicator of a == 0 when beta is infinite.
double psi(std::uint64_t a, Beta beta) noexcept;

struct ModelParams {
    int R = 2;
    Beta beta{2.0};
    DistributionSpec xi = DistributionSpec::point_mass(0);
    DistributionSpec zeta = DistributionSpec::point_mass(1);
};

/// Validated model: parameters plus ready-to-sample distributions.
class Model {
public:
    explicit Model(const ModelParams& params);

    const ModelParams& params() const noexcept { return params_; }
    int R() const noexcept { return params_.R; }
    Beta beta() const noexcept { return params_.beta; }
    const Distribution& xi() const noexcept { return xi_; }
    const Distribution& zeta() const noexcept { return zeta_; }

    /// Load rho = 2 E(xi).
    double rho() const noexcept { return 2.0 * xi_.mean(); }

    double psi(std::uint64_t a) const noexcept
    {
        if (a < psi_table_.size()) {
            return psi_table_[a];
        }
        return linger::psi(a, params_.beta);
    }

    /// U < psi(y), avoiding pow() whenever U alone settles it.
    bool releases(std::uint64_t y, double u) const noexcept
    {
        if (y < psi_table_.size()) {
            return u < psi_table_[y];
        }
        if (u >= psi_table_.back()) {
            return false;
        }
        return u < linger::psi(y, params_.beta);
    }

private:
    ModelParams params_;
    Distribution xi_;
    Distribution zeta_;
    std::vector<double> psi_table_;
};

struct SystemState {
    std::vector<std::uint64_t> active;
    std::vector<std::uint64_t> inactive;

    static SystemState zeros(int R);
    std::uint64_t active_total() const noexcept;
    std::uint64_t inactive_total() const noexcept;
    std::uint64_t total() const noexcept { return active_total() + inactive_total(); }

    friend bool operator==(const SystemState&, const SystemState&) = default;
};

/// Observables of one switching cycle, from the state just after a switch to
/// the next switching time T*.
struct CycleRecord {
    std::uint64_t t_star = 0;
    /// First k >= 0 with A_r(k) = 0; empty if queue r never emptied before T*.
    std::vector<std::optional<std::uint64_t>> tau;
    /// Defined only when every tau_r is.
    std::optional<std::uint64_t> tau_max;
    std::vector<std::uint64_t> a_final;
    std::vector<std::uint64_t> s_final;
    /// Slots in [1, T*] that queue r started empty (nothing to transmit).
    std::vector<std::uint64_t> idle_slots;
    std::uint64_t release_events = 0;

    /// Smallest recorded tau_r (first queue to empty), if any.
    std::optional<std::uint64_t> tau_min() const noexcept;
    /// Index of the queue attaining tau_min.
    std::optional<int> first_emptied() const noexcept;
};

/// Thrown when a cycle exceeds its slot cap; carries the partial record.
class DivergedCycleError : public Error {
public:
    DivergedCycleError(const std::string& what, CycleRecord partial, std::uint64_t epoch = 0)
        : Error(what), partial_(std::move(partial)), epoch_(epoch)
    {
    }
    const CycleRecord& partial() const noexcept { return partial_; }
    std::uint64_t epoch() const noexcept { return epoch_; }

private:
    CycleRecord partial_;
    std::uint64_t epoch_;
};

/// Result of one active-queue slot.
struct SlotOutcome {
    std::uint64_t a_next;
    bool released;
    std::uint64_t zeta_added;
};

/// One slot of an active queue from explicit draws: Y = a + xi - 1{a>0},
/// released iff U < psi(Y), then a ζ jump (drawn through `draw_zeta`) when
/// Y > 0 and released.
template <typename ZetaDraw>
SlotOutcome apply_active_slot(std::uint64_t a, std::uint64_t xi_draw, double u, const Model& model,
                              ZetaDraw&& draw_zeta)
{
    const std::uint64_t y = a + xi_draw - (a > 0 ? 1 : 0);
    const bool released = y == 0 || (!model.beta().is_infinite() && model.releases(y, u));
    std::uint64_t jump = 0;
    if (released && y > 0) {
        jump = draw_zeta();
    }
    return {y + jump, released, jump};
}

/// Random streams owned by one active position r: arrivals, release coin, jump.
struct ActiveStreams {
    RngStream xi;
    RngStream coin;
    RngStream jump;
};

/// All streams of one chain. Active position r and inactive position r use
/// disjoint streams, so S is independent of everything deciding T*.
class ChainStreams {
public:
    ChainStreams(std::uint64_t master_seed, std::uint64_t chain_id, int R);

    ActiveStreams& active(int r) { return active_[static_cast<std::size_t>(r)]; }
    RngStream& inactive(int r) { return inactive_[static_cast<std::size_t>(r)]; }
    std::uint64_t chain_id() const noexcept { return chain_id_; }

private:
    std::uint64_t chain_id_;
    std::vector<ActiveStreams> active_;
    std::vector<RngStream> inactive_;
};

/// One active-queue slot drawing from `streams`. The coin is drawn every slot
/// for finite beta; ζ is drawn only when consumed.
SlotOutcome active_slot_step(std::uint64_t a, const Model& model, ActiveStreams& streams);

/// Per-slot instrumentation for traces and bookkeeping checks.
struct SlotEvent {
    std::uint64_t slot;  // 1-based slot index within the cycle
    int position;        // active position r
    std::uint64_t a_before;
    std::uint64_t xi_draw;
    bool released;
    std::uint64_t zeta_added;
    std::uint64_t a_after;
};

class CycleObserver {
public:
    virtual ~CycleObserver() = default;
    virtual void on_active_slot(const SlotEvent& event) = 0;
    /// Called once per slot and inactive position, only when per-slot
    /// inactive arrivals are requested.
    virtual void on_inactive_slot(std::uint64_t /*slot*/, int /*position*/, std::uint64_t /*arrivals*/) {}
    /// Called after all positions of a slot were processed.
    virtual void on_slot_end(std::uint64_t /*slot*/, bool /*switched*/) {}
};

struct CycleOptions {
    std::uint64_t max_slots = 1'000'000'000;
    CycleObserver* observer = nullptr;
    /// Draw S slot by slot instead of as one sum over T* slots. Same law,
    /// different stream consumption.
    bool per_slot_inactive = false;
    /// Run at least one slot even when beta is infinite and a0 = 0.
    bool min_one_slot = false;
};

/// Simulates the active group from `a0` until all R queues release at the end
/// of the same slot. With beta infinite and a0 = 0 the cycle is empty (T* = 0);
/// otherwise at least one slot elapses.
CycleRecord run_cycle(std::span<const std::uint64_t> a0, const Model& model, ChainStreams& streams,
                      const CycleOptions& options = {});

/// One transition of the embedded chain: (inactive + S(T*), A(T*)).
/// From the all-zero state the cycle runs at least one slot. Otherwise an
/// empty system would switch in zero time forever when beta is infinite.
SystemState embedded_step(const SystemState& q, const Model& model, ChainStreams& streams, CycleRecord& record,
                          const CycleOptions& options = {});

using EpochSink = std::function<void(std::uint64_t epoch, const SystemState& state, const CycleRecord& record)>;

/// Runs `n_switches` embedded steps from q0, emitting (Q(k), cycle from Q(k))
/// for k = 0..n-1, and returns Q(n). `stop` may end the run early (checked
/// after each emitted epoch).
SystemState run_chain(const SystemState& q0, std::uint64_t n_switches, const Model& model, ChainStreams& streams,
                      const EpochSink& sink, const CycleOptions& options = {},
                      const std::function<bool(const SystemState&)>& stop = {});

}  // namespace linger
