#include "flowfl/netsim.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace flowfl::netsim {

CommGraphTimeline::CommGraphTimeline(std::size_t robots, Tick end_tick) : robots_(robots) {
    frames_.emplace_back(robots);
    frame_of_tick_.assign(static_cast<std::size_t>(std::max<Tick>(end_tick, 0)), 0);
}

CommGraphTimeline CommGraphTimeline::constant(std::size_t robots, Tick end_tick,
                                              const std::vector<std::pair<RobotId, RobotId>>& edges) {
    CommGraphTimeline tl;
    tl.robots_ = robots;
    Frame f(robots);
    for (auto [a, b] : edges) {
        if (a >= robots || b >= robots) throw std::out_of_range("edge references robot id >= swarm size");
        if (a == b) throw std::invalid_argument("a robot cannot be its own neighbour");
        f[a].push_back(b);
    }
    for (auto& n : f) {
        std::sort(n.begin(), n.end());
        n.erase(std::unique(n.begin(), n.end()), n.end());
    }
    tl.frames_.push_back(std::move(f));
    tl.frame_of_tick_.assign(static_cast<std::size_t>(end_tick), 0);
    return tl;
}

CommGraphTimeline CommGraphTimeline::fully_connected(std::size_t robots, Tick end_tick) {
    std::vector<std::pair<RobotId, RobotId>> edges;
    for (RobotId a = 0; a < robots; ++a)
        for (RobotId b = 0; b < robots; ++b)
            if (a != b) edges.emplace_back(a, b);
    return constant(robots, end_tick, edges);
}

void CommGraphTimeline::push_frame(Tick tick, Frame frame) {
    if (robots_ == 0) robots_ = frame.size();
    if (frame.size() != robots_) throw std::invalid_argument("frame size differs from swarm size");
    if (tick < end_tick()) throw std::invalid_argument("frames must be pushed in increasing tick order");
    for (RobotId r = 0; r < frame.size(); ++r) {
        auto& n = frame[r];
        std::sort(n.begin(), n.end());
        n.erase(std::unique(n.begin(), n.end()), n.end());
        if (!n.empty() && n.back() >= robots_) throw std::out_of_range("neighbour id >= swarm size");
        if (std::binary_search(n.begin(), n.end(), r)) throw std::invalid_argument("a robot cannot be its own neighbour");
    }
    if (tick > end_tick()) finish(tick);
    if (frames_.empty() || frames_.back() != frame) frames_.push_back(std::move(frame));
    frame_of_tick_.push_back(static_cast<std::uint32_t>(frames_.size() - 1));
}

void CommGraphTimeline::finish(Tick end) {
    if (end <= end_tick()) return;
    Frame empty(robots_);
    if (frames_.empty() || frames_.back() != empty) frames_.push_back(std::move(empty));
    frame_of_tick_.resize(static_cast<std::size_t>(end), static_cast<std::uint32_t>(frames_.size() - 1));
}

const std::vector<RobotId>& CommGraphTimeline::neighbors(Tick tick, RobotId robot) const {
    if (tick < 0 || tick >= end_tick()) throw std::out_of_range("tick " + std::to_string(tick) + " outside timeline");
    if (robot >= robots_) throw std::out_of_range("robot id " + std::to_string(robot) + " outside swarm");
    return frames_[frame_of_tick_[static_cast<std::size_t>(tick)]][robot];
}

bool CommGraphTimeline::adjacent(Tick tick, RobotId robot, RobotId neighbor) const {
    const auto& n = neighbors(tick, robot);
    return std::binary_search(n.begin(), n.end(), neighbor);
}

std::vector<std::pair<RobotId, RobotId>> CommGraphTimeline::edges(Tick tick) const {
    std::vector<std::pair<RobotId, RobotId>> out;
    for (RobotId r = 0; r < robots_; ++r)
        for (RobotId n : neighbors(tick, r)) out.emplace_back(r, n);
    return out;
}

std::vector<RobotId> neighbors(const CommGraphTimeline& timeline, Tick tick, RobotId robot) {
    return timeline.neighbors(tick, robot);
}

std::vector<MessageEvent> apply_loss(Rng& rng, std::vector<MessageEvent> events, double loss_probability) {
    if (!(loss_probability >= 0.0 && loss_probability <= 1.0))
        throw std::invalid_argument("loss probability must be in [0, 1]");
    if (loss_probability == 0.0) return events;
    std::vector<MessageEvent> kept;
    kept.reserve(events.size());
    for (auto& e : events)
        if (uniform01(rng) >= loss_probability) kept.push_back(std::move(e));
    return kept;
}

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ v); }

}  // namespace

std::uint64_t payload_digest(const Payload& p) {
    if (const auto* t = std::get_if<stigmergy::StigTuple>(&p)) {
        // (key, lamport, writer) names a value uniquely, so payload bytes are
        // left out of the digest.
        const std::uint64_t h = mix(fnv1a64(t->key), t->value.size());
        return mix(mix(h, t->lamport), t->writer);
    }
    const auto& b = std::get<barrier::BarrierToken>(p);
    std::uint64_t h = mix(mix(0x42, b.instance.round), static_cast<std::uint64_t>(b.instance.kind));
    for (RobotId id : b.ids) h = mix(h, id);
    return h;
}

Network::Network(const CommGraphTimeline& timeline, double loss_probability, Rng rng)
    : timeline_(&timeline), loss_probability_(loss_probability), rng_(std::move(rng)) {
    if (!(loss_probability >= 0.0 && loss_probability <= 1.0))
        throw std::invalid_argument("loss probability must be in [0, 1]");
}

std::optional<TickReport> Network::step(const TickHandler& handler) {
    if (now_ >= timeline_->end_tick()) return std::nullopt;
    const std::size_t robots = timeline_->robots();
    TickReport report;
    report.tick = now_;

    std::vector<std::vector<const Payload*>> inbox(robots);
    for (const auto& e : in_flight_) {
        const auto& recipients = timeline_->neighbors(now_, e.sender);
        if (recipients.empty()) ++report.dropped_link;
        const std::uint64_t pd = payload_digest(e.payload);
        for (RobotId r : recipients) {
            inbox[r].push_back(&e.payload);
            ++report.delivered;
            digest_ = mix(mix(mix(digest_, static_cast<std::uint64_t>(now_)), (std::uint64_t{e.sender} << 32) | r), pd);
        }
    }

    std::vector<MessageEvent> outgoing;
    std::vector<Payload> out;
    for (RobotId r = 0; r < robots; ++r) {
        out.clear();
        handler(r, now_, inbox[r], out);
        for (auto& p : out) outgoing.push_back(MessageEvent{r, std::move(p), now_ + 1});
    }
    report.sent = outgoing.size();
    const std::size_t before = outgoing.size();
    outgoing = apply_loss(rng_, std::move(outgoing), loss_probability_);
    report.dropped_loss = before - outgoing.size();
    for (const auto& e : outgoing)
        digest_ = mix(mix(mix(digest_, static_cast<std::uint64_t>(e.deliver_at)), e.sender), payload_digest(e.payload));

    in_flight_ = std::move(outgoing);
    ++now_;
    return report;
}

}  // namespace flowfl::netsim
