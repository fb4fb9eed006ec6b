#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowfl/types.hpp"

namespace flowfl::metrics {

// Mean Euclidean point error over every trajectory and every step.
double ade(std::span<const Trajectory> predicted, std::span<const Trajectory> truth);

// Mean Euclidean error at the final step only.
double fde(std::span<const Trajectory> predicted, std::span<const Trajectory> truth);

struct LossShare {
    double loss = 0.0;
    std::size_t samples = 0;
};

// Sum of n_k / n * L_k. Throws std::invalid_argument when no samples.
double federated_validation_loss(std::span<const LossShare> shares);

struct StoppingCriterion {
    std::size_t window = 5;
    double threshold = 1e-4;
};

// First round r whose trailing-window mean differs from the window ending at
// r-1 by less than the threshold (absolute). nullopt if it never happens or
// the curve is shorter than window + 1; the reason goes to diagnostic.
std::optional<std::size_t> stopping_round(std::span<const double> curve, const StoppingCriterion& criterion = {},
                                          std::string* diagnostic = nullptr);

struct LearnerEntry {
    RobotId robot = 0;
    std::size_t n_train = 0;
    std::size_t n_validation = 0;

    friend bool operator==(const LearnerEntry&, const LearnerEntry&) = default;
};

struct RoundRecord {
    std::size_t round = 0;
    VariantKind variant = VariantKind::flow_fl;
    Tick quorum_tick = 0;  // tick the quota/quorum condition first held
    Tick start_tick = 0;   // tick the last learner entered training
    Tick end_tick = 0;     // tick the last learner left the round
    Tick barrier_wait_ticks = 0;  // start_tick - quorum_tick; 0 for server rounds
    std::vector<LearnerEntry> learners;  // ascending robot id
    double federated_validation_loss = 0.0;
    bool complete = true;

    friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct TimingReport {
    std::vector<Tick> gap_ticks;
    std::vector<double> gap_seconds;
    double mean_barrier_wait = 0.0;
    double stdev_barrier_wait = 0.0;
};

// Needs at least two records; throws std::invalid_argument otherwise.
TimingReport timing_report(std::span<const RoundRecord> records);

double mean(std::span<const double> v);
double stdev(std::span<const double> v);

}  // namespace flowfl::metrics
