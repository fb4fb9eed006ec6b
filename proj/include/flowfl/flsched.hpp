#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "flowfl/aggregate.hpp"
#include "flowfl/barrier.hpp"
#include "flowfl/learner.hpp"
#include "flowfl/netsim.hpp"
#include "flowfl/stigmergy.hpp"
#include "flowfl/types.hpp"

namespace flowfl::flsched {

struct SchedulerConfig {
    std::size_t robots = 15;
    double quorum_fraction = 0.2;
    std::size_t quota = 20;
    std::size_t local_epochs = 1;

    std::size_t quorum() const;
    // Throws ConfigError on out-of-range values.
    void validate() const;
};

enum class Phase { idle, ready_waiting, learning, sharing };

const char* to_string(Phase p);

struct LearningTierState {
    Phase phase = Phase::idle;
    std::uint64_t round = 0;
    std::vector<std::size_t> buffer;  // collected, not yet assigned to a round
};

// What a robot does once the quorum barrier lets it into a round.
struct LearnerPlan {
    std::uint64_t round = 0;
    bool from_initialization = true;  // round 0 trains from the shared random init
    std::vector<std::size_t> samples;  // frozen training set for this round
};

enum class EventKind { became_ready, passed_quorum, published, completed, abandoned };

struct RobotEvent {
    Tick tick = 0;
    RobotId robot = 0;
    EventKind kind = EventKind::became_ready;
    std::uint64_t round = 0;
};

// One robot of the serverless variant: application-tier sample buffer,
// learning-tier state machine, its stigmergy replica and barrier endpoint.
// Training itself is run by the caller between ticks (see plan()).
class FlowRobot {
public:
    FlowRobot(RobotId id, const SchedulerConfig& config, learner::ModelWeights initial);

    RobotId id() const { return id_; }
    const LearningTierState& state() const { return state_; }
    const stigmergy::Replica& replica() const { return replica_; }
    const barrier::BarrierAgent& barriers() const { return barriers_; }
    const learner::ModelWeights& local_model() const { return model_; }

    // Buffers a finished recording. From Idle this may mark the robot ready:
    // ready tuple written, quorum barrier for the current round joined.
    // Returns true when that transition happened.
    bool on_sample_collected(std::size_t sample, Tick now);

    // Called once the quorum barrier passed. Non-ready robots get nullopt
    // (they only relay this round).
    std::optional<LearnerPlan> on_quorum_passed(Tick now);

    // Publishes the update under weights/<round>/<robot>, forgets the round's
    // samples and enters the completion barrier.
    void on_training_done(const aggregate::WeightContribution& update, Tick now);

    // Completion barrier check; on success returns to Idle of the next round.
    bool on_all_learners_shared(Tick now);

    // Network handler body: absorb inbox, take arrivals, advance the state
    // machine and emit pending traffic.
    void on_tick(Tick now, const std::vector<std::size_t>& arrivals,
                 const std::vector<const netsim::Payload*>& inbox, const std::vector<RobotId>& neighbors,
                 std::vector<netsim::Payload>& out);

    // The training the robot is waiting on, if it is in Learning.
    const std::optional<LearnerPlan>& plan() const { return plan_; }

    // Start weights for the pending plan: the init for round 0, otherwise the
    // fedavg of every round-(r-1) update this replica holds (read through the
    // tuple space, which also re-floods them). Falls back to the local model
    // when none has arrived.
    learner::ModelWeights retrieve_and_aggregate();

    // The model this robot would use for inference now: the aggregate of the
    // newest round whose updates it holds, or its local model.
    learner::ModelWeights current_view() const;

    std::vector<RobotEvent> drain_events();

private:
    void maybe_ready(Tick now);
    void observe_round_progress(Tick now);
    void emit(Tick now, EventKind kind, std::uint64_t round);
    barrier::BarrierId quorum_id(std::uint64_t round) const { return {round, barrier::BarrierKind::quorum}; }
    barrier::BarrierId completion_id(std::uint64_t round) const { return {round, barrier::BarrierKind::completion}; }

    RobotId id_;
    SchedulerConfig config_;
    std::size_t quorum_;
    LearningTierState state_;
    stigmergy::Replica replica_;
    barrier::BarrierAgent barriers_;
    learner::ModelWeights model_;
    std::optional<LearnerPlan> plan_;
    std::vector<RobotId> last_neighbors_;
    std::vector<RobotEvent> events_;
};

}  // namespace flowfl::flsched
