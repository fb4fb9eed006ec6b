#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowfl/types.hpp"

namespace flowfl::stigmergy {

struct StigTuple {
    std::string key;
    Bytes value;
    std::uint64_t lamport = 0;
    RobotId writer = 0;

    friend bool operator==(const StigTuple&, const StigTuple&) = default;
};

// Total order used for conflict resolution: lamport clock first, then writer id.
inline bool supersedes(const StigTuple& a, const StigTuple& b) {
    if (a.lamport != b.lamport) return a.lamport > b.lamport;
    return a.writer > b.writer;
}

// One robot's copy of the virtual stigmergy. Local operations never block;
// everything that must reach neighbours is queued in the outbox and drained by
// the network layer once per tick.
class Replica {
public:
    explicit Replica(RobotId owner) : owner_(owner) {}

    RobotId owner() const { return owner_; }

    const StigTuple& write(const std::string& key, Bytes value);

    // Returns the local value and queues the local tuple for propagation.
    std::optional<Bytes> read(const std::string& key);

    // Local lookup without generating traffic.
    const StigTuple* peek(const std::string& key) const;

    // Applies a tuple received from a neighbour. Returns true when the local
    // store changed.
    bool on_message(const StigTuple& incoming);

    // Queues every local tuple whose key satisfies the predicate.
    void push_matching(const std::function<bool(const std::string&)>& pred);

    // Removes and returns pending broadcasts, at most one per key (the latest
    // queued copy), in key order.
    std::vector<StigTuple> drain_outbox();

    bool outbox_empty() const { return outbox_.empty(); }
    const std::map<std::string, StigTuple>& store() const { return store_; }

    // Tuples whose key starts with prefix, in key order.
    std::vector<const StigTuple*> with_prefix(const std::string& prefix) const;

private:
    RobotId owner_;
    std::map<std::string, StigTuple> store_;
    std::deque<StigTuple> outbox_;
};

}  // namespace flowfl::stigmergy
