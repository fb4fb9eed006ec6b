#include "flowfl/flsched.hpp"

#include <algorithm>
#include <iterator>

namespace flowfl::flsched {

std::size_t SchedulerConfig::quorum() const { return barrier::quorum_size(quorum_fraction, robots); }

void SchedulerConfig::validate() const {
    if (robots == 0) throw ConfigError("swarm size must be positive");
    if (!(quorum_fraction > 0.0 && quorum_fraction <= 1.0)) throw ConfigError("quorum fraction must be in (0, 1]");
    if (quota < 1) throw ConfigError("quota must be at least 1");
    if (local_epochs < 1) throw ConfigError("local epochs must be at least 1");
}

const char* to_string(Phase p) {
    switch (p) {
        case Phase::idle: return "idle";
        case Phase::ready_waiting: return "ready_waiting";
        case Phase::learning: return "learning";
        case Phase::sharing: return "sharing";
    }
    return "unknown";
}

FlowRobot::FlowRobot(RobotId id, const SchedulerConfig& config, learner::ModelWeights initial)
    : id_(id), config_(config), quorum_(config.quorum()), replica_(id), barriers_(id), model_(std::move(initial)) {
    config_.validate();
}

void FlowRobot::emit(Tick now, EventKind kind, std::uint64_t round) { events_.push_back({now, id_, kind, round}); }

std::vector<RobotEvent> FlowRobot::drain_events() { return std::exchange(events_, {}); }

bool FlowRobot::on_sample_collected(std::size_t sample, Tick now) {
    state_.buffer.push_back(sample);
    const Phase before = state_.phase;
    maybe_ready(now);
    return before == Phase::idle && state_.phase == Phase::ready_waiting;
}

void FlowRobot::maybe_ready(Tick now) {
    if (state_.phase != Phase::idle || state_.buffer.size() < config_.quota) return;
    const auto q = quorum_id(state_.round);
    // Quorum already reached without us: wait for the next round.
    if (barriers_.known(q).size() >= quorum_) return;
    state_.phase = Phase::ready_waiting;
    replica_.write(aggregate::ready_key(state_.round, id_), {});
    barriers_.join(q, quorum_);
    barriers_.ready(q);
    emit(now, EventKind::became_ready, state_.round);
}

std::optional<LearnerPlan> FlowRobot::on_quorum_passed(Tick now) {
    if (state_.phase != Phase::ready_waiting || !barriers_.passed(quorum_id(state_.round))) return std::nullopt;
    state_.phase = Phase::learning;
    LearnerPlan plan{state_.round, state_.round == 0, std::exchange(state_.buffer, {})};
    plan_ = plan;
    emit(now, EventKind::passed_quorum, state_.round);
    return plan;
}

learner::ModelWeights FlowRobot::retrieve_and_aggregate() {
    if (!plan_) throw ProtocolError("retrieve_and_aggregate outside a learning round");
    if (plan_->from_initialization) return model_;
    std::vector<aggregate::WeightContribution> contributions;
    for (const auto* t : replica_.with_prefix(aggregate::weights_prefix(plan_->round - 1))) {
        const auto bytes = replica_.read(t->key);
        contributions.push_back(aggregate::decode_contribution(*bytes, model_.arch));
    }
    if (contributions.empty()) return model_;
    return aggregate::fedavg(contributions);
}

learner::ModelWeights FlowRobot::current_view() const {
    std::optional<std::uint64_t> newest;
    for (const auto* t : replica_.with_prefix("weights/")) {
        const auto r = aggregate::round_of_key(t->key);
        if (r && (!newest || *r > *newest)) newest = r;
    }
    if (!newest) return model_;
    std::vector<aggregate::WeightContribution> contributions;
    for (const auto* t : replica_.with_prefix(aggregate::weights_prefix(*newest)))
        contributions.push_back(aggregate::decode_contribution(t->value, model_.arch));
    return aggregate::fedavg(contributions);
}

void FlowRobot::on_training_done(const aggregate::WeightContribution& update, Tick now) {
    if (state_.phase != Phase::learning || !plan_) throw ProtocolError("on_training_done outside Learning");
    if (update.round != plan_->round || update.robot != id_) throw ProtocolError("update does not match the plan");
    const std::uint64_t r = state_.round;
    replica_.write(aggregate::weights_key(r, id_), aggregate::encode_contribution(update));
    model_ = update.weights;
    plan_.reset();
    state_.phase = Phase::sharing;
    const auto c = completion_id(r);
    barriers_.join(c, std::max<std::size_t>(1, barriers_.known(quorum_id(r)).size()));
    barriers_.ready(c);
    emit(now, EventKind::published, r);
}

bool FlowRobot::on_all_learners_shared(Tick now) {
    if (state_.phase != Phase::sharing) throw ProtocolError("on_all_learners_shared outside Sharing");
    const std::uint64_t r = state_.round;
    const auto c = completion_id(r);
    barriers_.raise_threshold(c, barriers_.known(quorum_id(r)).size());
    if (!barriers_.ready(c)) return false;
    state_.phase = Phase::idle;
    emit(now, EventKind::completed, r);
    ++state_.round;
    return true;
}

void FlowRobot::observe_round_progress(Tick now) {
    (void)now;
    while (true) {
        const auto& q = barriers_.known(quorum_id(state_.round));
        const auto& c = barriers_.known(completion_id(state_.round));
        if (q.size() < quorum_ || !std::includes(c.begin(), c.end(), q.begin(), q.end())) break;
        ++state_.round;
    }
    const auto seen = barriers_.highest_round_seen();
    if (seen > static_cast<std::int64_t>(state_.round)) state_.round = static_cast<std::uint64_t>(seen);
}

void FlowRobot::on_tick(Tick now, const std::vector<std::size_t>& arrivals,
                        const std::vector<const netsim::Payload*>& inbox, const std::vector<RobotId>& neighbors,
                        std::vector<netsim::Payload>& out) {
    for (const auto* p : inbox) {
        if (const auto* t = std::get_if<stigmergy::StigTuple>(p))
            replica_.on_message(*t);
        else
            barriers_.receive(std::get<barrier::BarrierToken>(*p));
    }
    for (std::size_t s : arrivals) on_sample_collected(s, now);

    std::vector<RobotId> fresh;
    std::set_difference(neighbors.begin(), neighbors.end(), last_neighbors_.begin(), last_neighbors_.end(),
                        std::back_inserter(fresh));
    last_neighbors_ = neighbors;
    const std::uint64_t live = state_.round > 0 ? state_.round - 1 : 0;
    if (!fresh.empty()) {
        barriers_.resync(live);
        replica_.push_matching([live](const std::string& key) {
            const auto r = aggregate::round_of_key(key);
            return r && *r >= live;
        });
    }

    // A round two ahead means ours finished long ago without us.
    if ((state_.phase == Phase::ready_waiting || state_.phase == Phase::sharing) &&
        barriers_.highest_round_seen() >= static_cast<std::int64_t>(state_.round + 2)) {
        emit(now, EventKind::abandoned, state_.round);
        state_.phase = Phase::idle;
        state_.round = static_cast<std::uint64_t>(barriers_.highest_round_seen());
    }

    for (int guard = 0; guard < 8; ++guard) {
        const Phase before = state_.phase;
        const std::uint64_t round_before = state_.round;
        switch (state_.phase) {
            case Phase::idle:
                observe_round_progress(now);
                maybe_ready(now);
                break;
            case Phase::ready_waiting:
                if (barriers_.ready(quorum_id(state_.round))) on_quorum_passed(now);
                break;
            case Phase::learning:
                break;
            case Phase::sharing:
                on_all_learners_shared(now);
                break;
        }
        if (state_.phase == before && state_.round == round_before) break;
    }

    if (state_.round > 1) barriers_.retire_before(state_.round - 1);

    for (auto& t : replica_.drain_outbox()) out.emplace_back(std::move(t));
    for (auto& b : barriers_.drain_outbox()) out.emplace_back(std::move(b));
}

}  // namespace flowfl::flsched
