#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "flowfl/barrier.hpp"
#include "flowfl/rng.hpp"
#include "flowfl/stigmergy.hpp"
#include "flowfl/types.hpp"

namespace flowfl::netsim {

// Directed neighbour lists for every tick in [0, end_tick()). Consecutive
// identical frames share storage, so long static stretches cost nothing.
class CommGraphTimeline {
public:
    using Frame = std::vector<std::vector<RobotId>>;  // per robot, sorted

    CommGraphTimeline() = default;
    CommGraphTimeline(std::size_t robots, Tick end_tick);

    // Same adjacency at every tick. Edges are directed (robot, neighbour).
    static CommGraphTimeline constant(std::size_t robots, Tick end_tick,
                                      const std::vector<std::pair<RobotId, RobotId>>& edges);
    static CommGraphTimeline fully_connected(std::size_t robots, Tick end_tick);

    // Frames must be appended in tick order; ticks skipped are empty.
    void push_frame(Tick tick, Frame frame);
    // Pads with empty frames up to end_tick.
    void finish(Tick end_tick);

    std::size_t robots() const { return robots_; }
    Tick end_tick() const { return static_cast<Tick>(frame_of_tick_.size()); }

    // Throws std::out_of_range when tick is outside the timeline.
    const std::vector<RobotId>& neighbors(Tick tick, RobotId robot) const;
    bool adjacent(Tick tick, RobotId robot, RobotId neighbor) const;

    // Edges at tick as directed pairs, in robot then neighbour order.
    std::vector<std::pair<RobotId, RobotId>> edges(Tick tick) const;

    std::size_t distinct_frames() const { return frames_.size(); }

private:
    std::size_t robots_ = 0;
    std::vector<Frame> frames_;
    std::vector<std::uint32_t> frame_of_tick_;
};

std::vector<RobotId> neighbors(const CommGraphTimeline& timeline, Tick tick, RobotId robot);

using Payload = std::variant<stigmergy::StigTuple, barrier::BarrierToken>;

struct MessageEvent {
    RobotId sender = 0;
    Payload payload;
    Tick deliver_at = 0;
};

// Independent Bernoulli drop of each event.
std::vector<MessageEvent> apply_loss(Rng& rng, std::vector<MessageEvent> events, double loss_probability);

struct TickReport {
    Tick tick = 0;
    std::size_t delivered = 0;      // recipient copies handed to handlers
    std::size_t dropped_link = 0;   // in-flight events whose sender had no neighbours at delivery
    std::size_t dropped_loss = 0;   // broadcasts removed by the loss model
    std::size_t sent = 0;           // broadcasts emitted this tick
};

// Per-robot callback: (robot, tick, inbox, outbox). The inbox points into
// events owned by the network and is valid for the call only.
using TickHandler =
    std::function<void(RobotId, Tick, const std::vector<const Payload*>&, std::vector<Payload>&)>;

class Network {
public:
    Network(const CommGraphTimeline& timeline, double loss_probability, Rng rng);

    // Delivers due messages, runs handlers in ascending robot id, queues new
    // broadcasts for the next tick and advances the clock. Returns nullopt
    // once the timeline is exhausted.
    std::optional<TickReport> step(const TickHandler& handler);

    Tick now() const { return now_; }
    std::size_t in_flight() const { return in_flight_.size(); }
    const CommGraphTimeline& timeline() const { return *timeline_; }

    // Running hash over every sent and delivered message; equal digests mean
    // equal traces.
    std::uint64_t trace_digest() const { return digest_; }

private:
    const CommGraphTimeline* timeline_;
    double loss_probability_;
    Rng rng_;
    Tick now_ = 0;
    std::vector<MessageEvent> in_flight_;
    std::uint64_t digest_ = 0xcbf29ce484222325ULL;
};

std::uint64_t payload_digest(const Payload& p);

}  // namespace flowfl::netsim
