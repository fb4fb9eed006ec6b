#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "flowfl/types.hpp"

namespace flowfl::barrier {

enum class BarrierPhase { inactive, waiting, passed };

// The member list one robot holds for one barrier instance.
struct BarrierState {
    std::set<RobotId> members;
    std::size_t threshold = 1;
    BarrierPhase phase = BarrierPhase::inactive;
};

// Starts a fresh barrier instance. Throws ProtocolError if the state is
// already waiting.
void barrier_set(BarrierState& state, std::size_t threshold);

// Absorbs ids received from neighbours and returns the ones not seen before;
// the caller re-broadcasts exactly those. Requires phase == waiting.
std::vector<RobotId> on_barrier_update(BarrierState& state, std::span<const RobotId> incoming);

// Marks self as ready and reports whether the member count reached the
// threshold. Requires phase == waiting or passed (a passed state stays passed).
bool barrier_ready(BarrierState& state, RobotId self);

// ceil(fraction * robots), tolerant of binary rounding in the product.
std::size_t quorum_size(double fraction, std::size_t robots);

enum class BarrierKind : std::uint8_t { quorum = 0, completion = 1 };

// Instances are per round so late traffic from an older round cannot leak
// into a newer one.
struct BarrierId {
    std::uint64_t round = 0;
    BarrierKind kind = BarrierKind::quorum;

    friend auto operator<=>(const BarrierId&, const BarrierId&) = default;
};

struct BarrierToken {
    BarrierId instance;
    std::vector<RobotId> ids;  // sorted, unique

    friend bool operator==(const BarrierToken&, const BarrierToken&) = default;
};

// Per-robot barrier endpoint. Tracks every instance it hears about so it can
// forward gossip even for barriers it never joins; joined instances carry a
// BarrierState driven by the Algorithm-1 style operations above.
class BarrierAgent {
public:
    explicit BarrierAgent(RobotId self) : self_(self) {}

    RobotId self() const { return self_; }

    void receive(const BarrierToken& token);

    // barrier_set on the instance, then replays ids already relayed for it.
    void join(BarrierId id, std::size_t threshold);

    // barrier_ready on a joined instance. Returns true once passed.
    bool ready(BarrierId id);

    // Thresholds may only grow (completion barriers learn late learners).
    void raise_threshold(BarrierId id, std::size_t threshold);

    bool joined(BarrierId id) const;
    bool passed(BarrierId id) const;
    const BarrierState* state(BarrierId id) const;

    // Every id heard for the instance, joined or not.
    const std::set<RobotId>& known(BarrierId id) const;

    // Highest round any token has mentioned; -1 when none.
    std::int64_t highest_round_seen() const { return highest_round_; }

    // Queues the full known set of every instance with round >= min_round.
    void resync(std::uint64_t min_round);

    // Drops instances older than min_round; later tokens for them are ignored.
    void retire_before(std::uint64_t min_round);

    std::vector<BarrierToken> drain_outbox();

private:
    struct Instance {
        std::set<RobotId> known;
        BarrierState state;
        bool joined = false;
    };

    Instance& instance(BarrierId id);
    void note_round(std::uint64_t round);

    RobotId self_;
    std::map<BarrierId, Instance> instances_;
    std::map<BarrierId, std::set<RobotId>> outbox_;
    std::int64_t highest_round_ = -1;
    std::uint64_t retired_below_ = 0;
};

}  // namespace flowfl::barrier
