#include "flowfl/barrier.hpp"

#include <cmath>

namespace flowfl::barrier {

void barrier_set(BarrierState& state, std::size_t threshold) {
    if (state.phase == BarrierPhase::waiting) throw ProtocolError("barrier_set while already waiting");
    if (threshold == 0) throw ProtocolError("barrier threshold must be positive");
    state.members.clear();
    state.threshold = threshold;
    state.phase = BarrierPhase::waiting;
}

std::vector<RobotId> on_barrier_update(BarrierState& state, std::span<const RobotId> incoming) {
    if (state.phase != BarrierPhase::waiting) throw ProtocolError("on_barrier_update outside waiting phase");
    std::vector<RobotId> added;
    for (RobotId id : incoming)
        if (state.members.insert(id).second) added.push_back(id);
    return added;
}

bool barrier_ready(BarrierState& state, RobotId self) {
    if (state.phase == BarrierPhase::passed) return true;
    if (state.phase != BarrierPhase::waiting) throw ProtocolError("barrier_ready before barrier_set");
    state.members.insert(self);
    if (state.members.size() >= state.threshold) {
        state.phase = BarrierPhase::passed;
        return true;
    }
    return false;
}

std::size_t quorum_size(double fraction, std::size_t robots) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("quorum fraction must be in (0, 1]");
    const double product = fraction * static_cast<double>(robots);
    auto q = static_cast<std::size_t>(std::ceil(product - 1e-9));
    if (q == 0) q = 1;
    return q;
}

BarrierAgent::Instance& BarrierAgent::instance(BarrierId id) {
    note_round(id.round);
    return instances_[id];
}

void BarrierAgent::note_round(std::uint64_t round) {
    if (static_cast<std::int64_t>(round) > highest_round_) highest_round_ = static_cast<std::int64_t>(round);
}

void BarrierAgent::receive(const BarrierToken& token) {
    if (token.instance.round < retired_below_) return;
    Instance& inst = instance(token.instance);
    std::vector<RobotId> fresh;
    for (RobotId id : token.ids)
        if (inst.known.insert(id).second) fresh.push_back(id);
    if (fresh.empty()) return;
    if (inst.joined && inst.state.phase == BarrierPhase::waiting) on_barrier_update(inst.state, fresh);
    // Passed instances keep the frozen member list but still forward stragglers.
    auto& pending = outbox_[token.instance];
    pending.insert(fresh.begin(), fresh.end());
}

void BarrierAgent::join(BarrierId id, std::size_t threshold) {
    Instance& inst = instance(id);
    barrier_set(inst.state, threshold);
    inst.joined = true;
    const std::vector<RobotId> relayed(inst.known.begin(), inst.known.end());
    on_barrier_update(inst.state, relayed);
}

bool BarrierAgent::ready(BarrierId id) {
    auto it = instances_.find(id);
    if (it == instances_.end() || !it->second.joined) throw ProtocolError("barrier_ready on an instance never joined");
    Instance& inst = it->second;
    if (inst.known.insert(self_).second) outbox_[id].insert(self_);
    return barrier_ready(inst.state, self_);
}

void BarrierAgent::raise_threshold(BarrierId id, std::size_t threshold) {
    auto it = instances_.find(id);
    if (it == instances_.end() || !it->second.joined) throw ProtocolError("raise_threshold on an instance never joined");
    auto& st = it->second.state;
    if (st.phase == BarrierPhase::waiting && threshold > st.threshold) st.threshold = threshold;
}

bool BarrierAgent::joined(BarrierId id) const {
    auto it = instances_.find(id);
    return it != instances_.end() && it->second.joined;
}

bool BarrierAgent::passed(BarrierId id) const {
    auto it = instances_.find(id);
    return it != instances_.end() && it->second.joined && it->second.state.phase == BarrierPhase::passed;
}

const BarrierState* BarrierAgent::state(BarrierId id) const {
    auto it = instances_.find(id);
    if (it == instances_.end() || !it->second.joined) return nullptr;
    return &it->second.state;
}

const std::set<RobotId>& BarrierAgent::known(BarrierId id) const {
    static const std::set<RobotId> empty;
    auto it = instances_.find(id);
    return it == instances_.end() ? empty : it->second.known;
}

void BarrierAgent::resync(std::uint64_t min_round) {
    for (auto it = instances_.lower_bound(BarrierId{min_round, BarrierKind::quorum}); it != instances_.end(); ++it) {
        if (it->second.known.empty()) continue;
        outbox_[it->first].insert(it->second.known.begin(), it->second.known.end());
    }
}

void BarrierAgent::retire_before(std::uint64_t min_round) {
    if (min_round <= retired_below_) return;
    retired_below_ = min_round;
    const BarrierId bound{min_round, BarrierKind::quorum};
    instances_.erase(instances_.begin(), instances_.lower_bound(bound));
    outbox_.erase(outbox_.begin(), outbox_.lower_bound(bound));
}

std::vector<BarrierToken> BarrierAgent::drain_outbox() {
    std::vector<BarrierToken> out;
    out.reserve(outbox_.size());
    for (auto& [id, ids] : outbox_)
        if (!ids.empty()) out.push_back(BarrierToken{id, std::vector<RobotId>(ids.begin(), ids.end())});
    outbox_.clear();
    return out;
}

}  // namespace flowfl::barrier
