#include "flowfl/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string_view>
#include <tuple>

#include "flowfl/metrics.hpp"
#include "flowfl/rng.hpp"

namespace flowfl::dataio {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool is_comment(std::string_view t) { return !t.empty() && t.front() == '#'; }

void note(LoadReport& rep, std::string msg) {
    constexpr std::size_t kMaxDiagnostics = 50;
    if (rep.diagnostics.size() < kMaxDiagnostics) rep.diagnostics.push_back(std::move(msg));
}

struct Record {
    RobotId robot, neighbor;
    Tick t;
    double x, y;
};

void close_block(std::vector<Record>& block, std::size_t first_line, TrajectoryLoad& load) {
    if (block.empty()) return;
    const auto reject = [&](const std::string& why) {
        ++load.report.rejected_samples;
        note(load.report, "sample starting at line " + std::to_string(first_line) + " rejected: " + why);
        block.clear();
    };
    if (block.size() != kSampleLength)
        return reject(std::to_string(block.size()) + " points, expected " + std::to_string(kSampleLength));
    for (std::size_t k = 1; k < block.size(); ++k) {
        if (block[k].robot != block[0].robot || block[k].neighbor != block[0].neighbor)
            return reject("mixes robot/neighbor ids");
        if (block[k].t != block[k - 1].t + 1) return reject("time steps are not consecutive");
    }
    TrajectorySample s;
    s.observer = block[0].robot;
    s.subject = block[0].neighbor;
    s.start_tick = block[0].t;
    s.points.reserve(block.size());
    for (const auto& r : block) s.points.push_back({r.x, r.y});
    load.samples.push_back(std::move(s));
    block.clear();
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

TrajectoryLoad parse_trajectories(std::istream& in) {
    TrajectoryLoad load;
    std::vector<Record> block;
    std::size_t block_line = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        ++load.report.lines;
        const auto t = trim(line);
        if (t.empty()) {
            close_block(block, block_line, load);
            continue;
        }
        if (is_comment(t)) continue;
        const auto f = split_fields(t);
        Record r{};
        double z = 0.0;
        if (f.size() != 6 || !parse_number(f[0], r.robot) || !parse_number(f[1], r.neighbor) ||
            !parse_number(f[2], r.t) || !parse_number(f[3], r.x) || !parse_number(f[4], r.y) ||
            !parse_number(f[5], z) || !std::isfinite(r.x) || !std::isfinite(r.y)) {
            ++load.report.malformed_lines;
            note(load.report, "line " + std::to_string(lineno) + ": malformed trajectory record");
            continue;
        }
        if (block.empty()) block_line = lineno;
        block.push_back(r);
    }
    close_block(block, block_line, load);
    if (load.samples.empty()) throw DataError("no valid trajectory samples");
    return load;
}

TrajectoryLoad load_trajectory_file(const std::string& path) {
    auto in = open_input(path);
    return parse_trajectories(in);
}

void write_trajectories(std::ostream& out, std::span<const TrajectorySample> samples) {
    bool first = true;
    for (const auto& s : samples) {
        if (!first) out << '\n';
        first = false;
        for (std::size_t k = 0; k < s.points.size(); ++k) {
            out << s.observer << ',' << s.subject << ',' << s.start_tick + static_cast<Tick>(k) << ','
                << format_double(s.points[k].x) << ',' << format_double(s.points[k].y) << ",0\n";
        }
    }
}

void write_trajectory_file(const std::string& path, std::span<const TrajectorySample> samples) {
    auto out = open_output(path);
    write_trajectories(out, samples);
}

CommGraphLoad parse_comm_graph(std::istream& in, std::optional<std::size_t> robots, std::optional<Tick> end_tick) {
    CommGraphLoad load;
    std::vector<std::tuple<Tick, RobotId, RobotId>> recs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        ++load.report.lines;
        const auto t = trim(line);
        if (t.empty() || is_comment(t)) continue;
        const auto f = split_fields(t);
        Tick tick = 0;
        RobotId a = 0, b = 0;
        if (f.size() != 3 || !parse_number(f[0], tick) || !parse_number(f[1], a) || !parse_number(f[2], b) ||
            tick < 0 || a == b) {
            ++load.report.malformed_lines;
            note(load.report, "line " + std::to_string(lineno) + ": malformed communication record");
            continue;
        }
        recs.emplace_back(tick, a, b);
    }
    load.records = recs.size();
    std::sort(recs.begin(), recs.end());
    const auto dup_end = std::unique(recs.begin(), recs.end());
    load.duplicates = static_cast<std::size_t>(recs.end() - dup_end);
    recs.erase(dup_end, recs.end());

    std::size_t k = 0;
    Tick last = -1;
    for (const auto& [tick, a, b] : recs) {
        k = std::max<std::size_t>(k, std::max(a, b) + 1);
        last = std::max(last, tick);
    }
    if (robots) {
        if (k > *robots) throw DataError("communication graph references robot id >= " + std::to_string(*robots));
        k = *robots;
    }
    const Tick end = end_tick ? *end_tick : last + 1;

    load.timeline = netsim::CommGraphTimeline(k, 0);
    std::size_t i = 0;
    while (i < recs.size()) {
        const Tick tick = std::get<0>(recs[i]);
        netsim::CommGraphTimeline::Frame frame(k);
        std::set<std::pair<RobotId, RobotId>> edges;
        for (; i < recs.size() && std::get<0>(recs[i]) == tick; ++i) {
            const auto [t_, a, b] = recs[i];
            frame[a].push_back(b);
            edges.emplace(a, b);
        }
        for (const auto& [a, b] : edges) {
            if (!edges.count({b, a})) {
                if (load.asymmetric_edges == 0)
                    note(load.report, "asymmetric record at t=" + std::to_string(tick) + ": " + std::to_string(a) +
                                          " sees " + std::to_string(b) + " but not the reverse");
                ++load.asymmetric_edges;
            }
        }
        if (tick >= end) break;
        load.timeline.push_frame(tick, std::move(frame));
    }
    load.timeline.finish(end);
    if (load.asymmetric_edges > 0)
        note(load.report, std::to_string(load.asymmetric_edges) + " directed records lack a reverse record");
    return load;
}

CommGraphLoad load_comm_graph(const std::string& path, std::optional<std::size_t> robots,
                              std::optional<Tick> end_tick) {
    auto in = open_input(path);
    return parse_comm_graph(in, robots, end_tick);
}

void write_comm_graph(std::ostream& out, const netsim::CommGraphTimeline& timeline) {
    for (Tick t = 0; t < timeline.end_tick(); ++t)
        for (const auto& [a, b] : timeline.edges(t)) out << t << ',' << a << ',' << b << '\n';
}

void write_comm_graph_file(const std::string& path, const netsim::CommGraphTimeline& timeline) {
    auto out = open_output(path);
    write_comm_graph(out, timeline);
}

std::vector<std::vector<std::size_t>> stream_by_time(std::span<const TrajectorySample> samples, std::size_t robots) {
    std::vector<std::vector<std::size_t>> streams(robots);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].observer >= robots) throw DataError("sample observer id outside swarm");
        streams[samples[i].observer].push_back(i);
    }
    for (auto& s : streams)
        std::stable_sort(s.begin(), s.end(), [&](std::size_t a, std::size_t b) {
            return std::tie(samples[a].start_tick, samples[a].subject) <
                   std::tie(samples[b].start_tick, samples[b].subject);
        });
    return streams;
}

TimeSplit split_by_time(std::span<const TrajectorySample> samples, Tick duration, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ConfigError("train fraction must be in (0, 1]");
    TimeSplit split;
    split.cutoff = static_cast<Tick>(std::llround(static_cast<double>(duration) * train_fraction));
    for (const auto& s : samples) (s.start_tick < split.cutoff ? split.train : split.test).push_back(s);
    return split;
}

std::size_t training_count(std::size_t n, double validation_fraction) {
    const auto val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * validation_fraction));
    return n - std::min(val, n);
}

RateStats samples_per_window(std::span<const TrajectorySample> samples, std::size_t robots, Tick duration,
                             Tick window_ticks) {
    RateStats st;
    if (window_ticks <= 0) throw std::invalid_argument("window must be positive");
    const auto windows = static_cast<std::size_t>(duration / window_ticks);
    if (windows == 0 || robots == 0) return st;
    std::vector<double> counts(robots * windows, 0.0);
    for (const auto& s : samples) {
        const auto w = static_cast<std::size_t>(s.start_tick / window_ticks);
        if (s.observer < robots && w < windows) counts[s.observer * windows + w] += 1.0;
    }
    st.mean = metrics::mean(counts);
    st.stdev = metrics::stdev(counts);
    st.windows = windows;
    return st;
}

std::vector<Point2> to_local_frame(const Pose& frame, std::span<const Point2> world) {
    const double c = std::cos(frame.heading), s = std::sin(frame.heading);
    std::vector<Point2> out;
    out.reserve(world.size());
    for (const auto& p : world) {
        const double dx = p.x - frame.position.x, dy = p.y - frame.position.y;
        out.push_back({c * dx + s * dy, -s * dx + c * dy});
    }
    return out;
}

std::string to_string(Behavior b) {
    switch (b) {
        case Behavior::straight_bounce: return "straight-bounce";
        case Behavior::circle: return "circle";
        case Behavior::waypoint: return "waypoint";
    }
    return "unknown";
}

Behavior parse_behavior(const std::string& s) {
    if (s == "straight-bounce" || s == "straight_bounce") return Behavior::straight_bounce;
    if (s == "circle") return Behavior::circle;
    if (s == "waypoint") return Behavior::waypoint;
    throw ConfigError("unknown synthetic behavior '" + s + "'");
}

namespace {

struct Mover {
    Point2 pos;
    Point2 vel;  // m/tick
    // circle
    Point2 center;
    double radius = 0.0, phase = 0.0, omega = 0.0;
    // waypoint
    Point2 target;

    double heading() const { return std::atan2(vel.y, vel.x); }
};

class MotionModel {
public:
    MotionModel(const SyntheticMotionConfig& c, Rng rng) : c_(c), rng_(std::move(rng)) {
        const double step = c.speed * kSecondsPerTick;
        movers_.resize(c.robots);
        for (auto& m : movers_) {
            m.pos = random_point();
            const double th = 2.0 * std::numbers::pi * uniform01(rng_);
            switch (c.behavior) {
                case Behavior::straight_bounce:
                    m.vel = {step * std::cos(th), step * std::sin(th)};
                    break;
                case Behavior::circle: {
                    const double max_r = std::max(0.05, 0.5 * std::min(c.arena_width, c.arena_height) - 0.05);
                    m.radius = std::min(max_r, 0.5 + uniform01(rng_));
                    m.center = {m.radius + uniform01(rng_) * std::max(0.0, c.arena_width - 2 * m.radius),
                                m.radius + uniform01(rng_) * std::max(0.0, c.arena_height - 2 * m.radius)};
                    m.phase = th;
                    m.omega = (uniform01(rng_) < 0.5 ? -1.0 : 1.0) * step / m.radius;
                    m.pos = {m.center.x + m.radius * std::cos(m.phase), m.center.y + m.radius * std::sin(m.phase)};
                    m.vel = {-m.omega * m.radius * std::sin(m.phase), m.omega * m.radius * std::cos(m.phase)};
                    break;
                }
                case Behavior::waypoint:
                    m.target = random_point();
                    aim(m, step);
                    break;
            }
        }
    }

    const std::vector<Mover>& movers() const { return movers_; }

    void advance() {
        const double step = c_.speed * kSecondsPerTick;
        for (auto& m : movers_) {
            switch (c_.behavior) {
                case Behavior::straight_bounce:
                    m.pos.x += m.vel.x;
                    m.pos.y += m.vel.y;
                    reflect(m.pos.x, m.vel.x, c_.arena_width);
                    reflect(m.pos.y, m.vel.y, c_.arena_height);
                    break;
                case Behavior::circle:
                    m.phase += m.omega;
                    m.pos = {m.center.x + m.radius * std::cos(m.phase), m.center.y + m.radius * std::sin(m.phase)};
                    m.vel = {-m.omega * m.radius * std::sin(m.phase), m.omega * m.radius * std::cos(m.phase)};
                    break;
                case Behavior::waypoint:
                    if (std::hypot(m.target.x - m.pos.x, m.target.y - m.pos.y) <= step) {
                        m.pos = m.target;
                        m.target = random_point();
                        aim(m, step);
                    } else {
                        m.pos.x += m.vel.x;
                        m.pos.y += m.vel.y;
                    }
                    break;
            }
        }
    }

private:
    Point2 random_point() { return {uniform01(rng_) * c_.arena_width, uniform01(rng_) * c_.arena_height}; }

    static void aim(Mover& m, double step) {
        const double dx = m.target.x - m.pos.x, dy = m.target.y - m.pos.y;
        const double d = std::hypot(dx, dy);
        m.vel = d > 0 ? Point2{step * dx / d, step * dy / d} : Point2{step, 0.0};
    }

    static void reflect(double& p, double& v, double limit) {
        if (p < 0.0) {
            p = -p;
            v = -v;
        } else if (p > limit) {
            p = 2.0 * limit - p;
            v = -v;
        }
    }

    SyntheticMotionConfig c_;
    Rng rng_;
    std::vector<Mover> movers_;
};

}  // namespace

SyntheticDataset synthesize(const SyntheticMotionConfig& c) {
    if (c.robots == 0) throw ConfigError("synthetic swarm needs at least one robot");
    if (c.duration <= 0) throw ConfigError("synthetic duration must be positive");
    if (!(c.arena_width > 0 && c.arena_height > 0)) throw ConfigError("arena dimensions must be positive");
    if (c.speed < 0 || c.comm_range < 0 || c.sensing_range < 0 || c.noise_sigma < 0)
        throw ConfigError("speed, ranges and noise must be non-negative");

    SyntheticDataset out;
    if (std::hypot(c.arena_width, c.arena_height) <= c.comm_range)
        out.warnings.push_back("arena fits inside communication range: the graph is always fully connected");

    MotionModel motion(c, make_stream(c.seed, "synth/motion"));
    Rng noise_rng = make_stream(c.seed, "synth/noise");
    std::normal_distribution<double> noise(0.0, c.noise_sigma);

    const std::size_t K = c.robots;
    struct Run {
        Tick start = -1;
        Pose frame;
        std::vector<Point2> world;
    };
    std::vector<Run> runs(K * K);
    out.timeline = netsim::CommGraphTimeline(K, 0);

    for (Tick t = 0; t < c.duration; ++t) {
        const auto& m = motion.movers();
        netsim::CommGraphTimeline::Frame frame(K);
        for (RobotId o = 0; o < K; ++o) {
            for (RobotId s = 0; s < K; ++s) {
                if (o == s) continue;
                const double d = std::hypot(m[s].pos.x - m[o].pos.x, m[s].pos.y - m[o].pos.y);
                if (d <= c.comm_range) frame[o].push_back(s);
                Run& run = runs[o * K + s];
                if (d > c.sensing_range) {
                    run.start = -1;
                    run.world.clear();
                    continue;
                }
                if (run.start < 0) {
                    run.start = t;
                    run.frame = Pose{m[o].pos, m[o].heading()};
                    run.world.clear();
                }
                run.world.push_back(m[s].pos);
                if (run.world.size() == kSampleLength) {
                    TrajectorySample sample{o, s, run.start, to_local_frame(run.frame, run.world)};
                    if (c.noise_sigma > 0)
                        for (auto& p : sample.points) {
                            p.x += noise(noise_rng);
                            p.y += noise(noise_rng);
                        }
                    out.samples.push_back(std::move(sample));
                    run.start = -1;
                    run.world.clear();
                }
            }
        }
        out.timeline.push_frame(t, std::move(frame));
        motion.advance();
    }
    out.timeline.finish(c.duration);
    return out;
}

}  // namespace flowfl::dataio
