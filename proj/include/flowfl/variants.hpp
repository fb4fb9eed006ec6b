#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowfl/aggregate.hpp"
#include "flowfl/dataio.hpp"
#include "flowfl/flsched.hpp"
#include "flowfl/learner.hpp"
#include "flowfl/metrics.hpp"
#include "flowfl/netsim.hpp"

namespace flowfl::aggregate {

// Training stream (recordings starting before the cutoff) and held-out test
// slice of one experiment.
struct ExperimentData {
    std::size_t robots = 0;
    Tick duration = 0;
    Tick cutoff = 0;
    std::vector<dataio::TrajectorySample> train;
    std::vector<dataio::TrajectorySample> test;

    static ExperimentData from_samples(std::span<const dataio::TrajectorySample> samples, std::size_t robots,
                                       Tick duration, double train_fraction = 0.8);
};

struct FlConfig {
    flsched::SchedulerConfig scheduler;
    learner::ArchDescriptor arch;
    learner::OptimizerConfig optimizer;
    learner::TrainConfig train;
    double validation_fraction = 0.2;
    bool sliding_windows = false;
    std::uint64_t seed = 1;
    double loss_probability = 0.0;
    std::size_t threads = 1;
};

struct RoundData {
    std::vector<learner::TrainingPair> train;
    std::vector<learner::TrainingPair> validation;
};

// Leading recordings train, trailing ones validate.
RoundData round_data(const ExperimentData& data, std::span<const std::size_t> samples, const FlConfig& config);

// The shared random initialization every robot starts from.
learner::ModelWeights initial_weights(const FlConfig& config);

// E local epochs from start on the round's training pairs. The generator is
// keyed by (robot, round) so the server and serverless variants draw the
// same shuffles and dropout masks.
WeightContribution local_update(const learner::Model& model, learner::ModelWeights start, const RoundData& data,
                                const FlConfig& config, RobotId robot, std::uint64_t round);

struct RunResult {
    VariantKind variant = VariantKind::flow_fl;
    std::vector<metrics::RoundRecord> rounds;
    std::vector<learner::ModelWeights> round_weights;  // fedavg of each record's updates
    std::vector<double> loss_curve;                    // federated validation loss per record
    std::optional<learner::ModelWeights> final_weights;
    std::vector<learner::ModelWeights> robot_views;  // Flow-FL only: each robot's own aggregate at the end
    std::string diagnostic;
    std::size_t messages_sent = 0;
    std::uint64_t trace_digest = 0;
};

struct CentralizedResult {
    std::vector<double> loss_curve;  // pooled validation loss after each epoch
    std::vector<double> training_loss;
    learner::ModelWeights final_weights;
    std::size_t pooled_samples = 0;
};

CentralizedResult run_centralized(const ExperimentData& data, std::size_t epochs, const FlConfig& config);

// An omniscient server opens a round at the first tick where quorum robots
// hold a quota; every robot at quota trains once and the server averages.
RunResult run_server_fl(const ExperimentData& data, const FlConfig& config);

// The serverless protocol over the simulated network.
RunResult run_flow_fl(const ExperimentData& data, const netsim::CommGraphTimeline& timeline, const FlConfig& config);

}  // namespace flowfl::aggregate
