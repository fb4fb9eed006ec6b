#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flowfl/netsim.hpp"
#include "flowfl/types.hpp"

namespace flowfl::dataio {

inline constexpr std::size_t kSampleLength = 100;

// One neighbour trajectory recorded by an observer, expressed in the
// observer's frame frozen at start_tick.
struct TrajectorySample {
    RobotId observer = 0;
    RobotId subject = 0;
    Tick start_tick = 0;
    std::vector<Point2> points;

    // A robot can only train on a recording once it has finished.
    Tick available_at() const { return start_tick + static_cast<Tick>(points.size()); }

    friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

struct LoadReport {
    std::size_t lines = 0;
    std::size_t malformed_lines = 0;
    std::size_t rejected_samples = 0;
    std::vector<std::string> diagnostics;

    bool clean() const { return malformed_lines == 0 && rejected_samples == 0 && diagnostics.empty(); }
};

struct TrajectoryLoad {
    std::vector<TrajectorySample> samples;
    LoadReport report;
};

// Blank-line separated blocks of `robot,neighbor,t,x,y,z` records. Blocks
// whose length differs from kSampleLength (or that mix robots or skip ticks)
// are rejected and counted. Throws DataError when nothing valid remains.
TrajectoryLoad parse_trajectories(std::istream& in);
TrajectoryLoad load_trajectory_file(const std::string& path);

void write_trajectories(std::ostream& out, std::span<const TrajectorySample> samples);
void write_trajectory_file(const std::string& path, std::span<const TrajectorySample> samples);

struct CommGraphLoad {
    netsim::CommGraphTimeline timeline;
    LoadReport report;
    std::size_t records = 0;
    std::size_t duplicates = 0;
    std::size_t asymmetric_edges = 0;  // (t, a, b) present without (t, b, a)
};

// `t,robot,neighbor` lines. robots/end_tick default to max id + 1 and
// max t + 1. Edges are honoured as directed.
CommGraphLoad parse_comm_graph(std::istream& in, std::optional<std::size_t> robots = std::nullopt,
                               std::optional<Tick> end_tick = std::nullopt);
CommGraphLoad load_comm_graph(const std::string& path, std::optional<std::size_t> robots = std::nullopt,
                              std::optional<Tick> end_tick = std::nullopt);

void write_comm_graph(std::ostream& out, const netsim::CommGraphTimeline& timeline);
void write_comm_graph_file(const std::string& path, const netsim::CommGraphTimeline& timeline);

// Per-observer sample indices ordered by start tick (then subject).
std::vector<std::vector<std::size_t>> stream_by_time(std::span<const TrajectorySample> samples,
                                                     std::size_t robots);

struct SplitPlan {
    double train_fraction = 0.8;       // of experiment time, for training + validation
    double validation_fraction = 0.2;  // trailing share of each learner's round data
};

struct TimeSplit {
    Tick cutoff = 0;
    std::vector<TrajectorySample> train;  // start_tick < cutoff
    std::vector<TrajectorySample> test;   // start_tick >= cutoff
};

TimeSplit split_by_time(std::span<const TrajectorySample> samples, Tick duration, double train_fraction = 0.8);

// Leading share of n ordered items used for training; the rest validates.
std::size_t training_count(std::size_t n, double validation_fraction);

struct RateStats {
    double mean = 0.0;
    double stdev = 0.0;
    std::size_t windows = 0;
};

// Samples collected per robot per window (default 10 min), over every full
// window of the experiment and every robot.
RateStats samples_per_window(std::span<const TrajectorySample> samples, std::size_t robots, Tick duration,
                             Tick window_ticks = 6000);

struct Pose {
    Point2 position;
    double heading = 0.0;  // radians, world frame
};

// World points expressed in the frame of `frame` (origin at its position,
// x axis along its heading).
std::vector<Point2> to_local_frame(const Pose& frame, std::span<const Point2> world);

enum class Behavior { straight_bounce, circle, waypoint };

std::string to_string(Behavior b);
Behavior parse_behavior(const std::string& s);

struct SyntheticMotionConfig {
    std::size_t robots = 15;
    double arena_width = 6.0;   // m
    double arena_height = 6.0;  // m
    double speed = 0.1;         // m/s
    Behavior behavior = Behavior::straight_bounce;
    double comm_range = 2.0;     // m
    double sensing_range = 2.0;  // m
    double noise_sigma = 0.1;    // m, per coordinate
    Tick duration = 20000;       // ticks of 0.1 s
    std::uint64_t seed = 1;
};

struct SyntheticDataset {
    std::vector<TrajectorySample> samples;
    netsim::CommGraphTimeline timeline;
    std::vector<std::string> warnings;
};

// Point robots under a simple kinematic behaviour. Each observer records
// every neighbour inside sensing range in back-to-back 100-tick windows;
// windows broken by leaving range are dropped.
SyntheticDataset synthesize(const SyntheticMotionConfig& config);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace flowfl::dataio
