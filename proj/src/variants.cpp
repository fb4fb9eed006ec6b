#include "flowfl/variants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "parallel.hpp"

namespace flowfl::aggregate {

ExperimentData ExperimentData::from_samples(std::span<const dataio::TrajectorySample> samples, std::size_t robots,
                                            Tick duration, double train_fraction) {
    ExperimentData d;
    d.robots = robots;
    d.duration = duration;
    auto split = dataio::split_by_time(samples, duration, train_fraction);
    d.cutoff = split.cutoff;
    d.train = std::move(split.train);
    d.test = std::move(split.test);
    for (const auto& s : d.train)
        if (s.observer >= robots) throw DataError("sample observer id outside swarm");
    return d;
}

RoundData round_data(const ExperimentData& data, std::span<const std::size_t> samples, const FlConfig& config) {
    RoundData rd;
    const std::size_t n_train = dataio::training_count(samples.size(), config.validation_fraction);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        auto pairs = learner::make_pairs(data.train.at(samples[k]).points, config.arch.history, config.arch.horizon,
                                         config.sliding_windows);
        auto& dst = k < n_train ? rd.train : rd.validation;
        for (auto& p : pairs) dst.push_back(std::move(p));
    }
    return rd;
}

learner::ModelWeights initial_weights(const FlConfig& config) {
    Rng rng = make_stream(config.seed, "init");
    return learner::init_weights(config.arch, rng);
}

WeightContribution local_update(const learner::Model& model, learner::ModelWeights start, const RoundData& data,
                                const FlConfig& config, RobotId robot, std::uint64_t round) {
    WeightContribution c{robot, round, std::move(start), data.train.size()};
    if (data.train.empty()) return c;
    Rng rng = make_stream(config.seed, "train", {robot, round});
    learner::OptimizerState opt(config.optimizer, c.weights.values.size());
    for (std::size_t e = 0; e < config.scheduler.local_epochs; ++e)
        learner::train_epoch(model, c.weights, data.train, opt, rng, config.train);
    return c;
}

namespace {

double federated_loss(const learner::Model& model, const learner::ModelWeights& w,
                      const std::vector<const RoundData*>& learners) {
    std::vector<metrics::LossShare> shares;
    for (const auto* rd : learners) {
        const auto loss = learner::validation_loss(model, w, rd->validation);
        if (loss) shares.push_back({*loss, rd->validation.size()});
    }
    if (shares.empty()) return std::numeric_limits<double>::quiet_NaN();
    return metrics::federated_validation_loss(shares);
}

struct Arrival {
    Tick tick;
    RobotId robot;
    std::size_t sample;
};

std::vector<Arrival> arrivals(const ExperimentData& data) {
    const auto streams = dataio::stream_by_time(data.train, data.robots);
    std::vector<Arrival> out;
    for (RobotId r = 0; r < streams.size(); ++r)
        for (std::size_t idx : streams[r]) out.push_back({data.train[idx].available_at(), r, idx});
    std::stable_sort(out.begin(), out.end(),
                     [](const Arrival& a, const Arrival& b) { return std::tie(a.tick, a.robot) < std::tie(b.tick, b.robot); });
    return out;
}

void check_config(const ExperimentData& data, const FlConfig& config) {
    config.scheduler.validate();
    if (config.scheduler.robots != data.robots) throw ConfigError("configured swarm size differs from the data's");
    if (!(config.validation_fraction >= 0.0 && config.validation_fraction < 1.0))
        throw ConfigError("validation fraction must be in [0, 1)");
}

}  // namespace

CentralizedResult run_centralized(const ExperimentData& data, std::size_t epochs, const FlConfig& config) {
    const auto model = learner::make_model(config.arch);
    const auto streams = dataio::stream_by_time(data.train, data.robots);
    RoundData pooled;
    CentralizedResult res;
    for (const auto& s : streams) {
        auto rd = round_data(data, s, config);
        res.pooled_samples += s.size();
        for (auto& p : rd.train) pooled.train.push_back(std::move(p));
        for (auto& p : rd.validation) pooled.validation.push_back(std::move(p));
    }
    res.final_weights = initial_weights(config);
    if (pooled.train.empty()) return res;
    learner::OptimizerState opt(config.optimizer, res.final_weights.values.size());
    Rng rng = make_stream(config.seed, "centralized");
    for (std::size_t e = 0; e < epochs; ++e) {
        const auto ep = learner::train_epoch(*model, res.final_weights, pooled.train, opt, rng, config.train);
        res.training_loss.push_back(ep.mean_loss);
        const auto v = learner::validation_loss(*model, res.final_weights, pooled.validation);
        res.loss_curve.push_back(v ? *v : ep.mean_loss);
    }
    return res;
}

RunResult run_server_fl(const ExperimentData& data, const FlConfig& config) {
    check_config(data, config);
    RunResult res;
    res.variant = VariantKind::server_fl;
    const auto model = learner::make_model(config.arch);
    const std::size_t quorum = config.scheduler.quorum();
    const std::size_t quota = config.scheduler.quota;
    learner::ModelWeights global = initial_weights(config);

    const auto events = arrivals(data);
    std::vector<std::vector<std::size_t>> buffers(data.robots);
    std::uint64_t round = 0;
    for (std::size_t i = 0; i < events.size();) {
        const Tick t = events[i].tick;
        for (; i < events.size() && events[i].tick == t; ++i) buffers[events[i].robot].push_back(events[i].sample);

        std::vector<RobotId> ready;
        for (RobotId r = 0; r < data.robots; ++r)
            if (buffers[r].size() >= quota) ready.push_back(r);
        if (ready.size() < quorum) continue;

        std::vector<RoundData> rd(ready.size());
        for (std::size_t k = 0; k < ready.size(); ++k) {
            rd[k] = round_data(data, buffers[ready[k]], config);
            buffers[ready[k]].clear();
        }
        std::vector<WeightContribution> updates(ready.size());
        detail::parallel_for(ready.size(), config.threads, [&](std::size_t k) {
            updates[k] = local_update(*model, global, rd[k], config, ready[k], round);
        });
        global = fedavg(updates);

        metrics::RoundRecord rec;
        rec.round = round;
        rec.variant = VariantKind::server_fl;
        rec.quorum_tick = rec.start_tick = rec.end_tick = t;
        std::vector<const RoundData*> views;
        for (std::size_t k = 0; k < ready.size(); ++k) {
            rec.learners.push_back({ready[k], rd[k].train.size(), rd[k].validation.size()});
            views.push_back(&rd[k]);
        }
        rec.federated_validation_loss = federated_loss(*model, global, views);
        res.rounds.push_back(rec);
        res.round_weights.push_back(global);
        res.loss_curve.push_back(rec.federated_validation_loss);
        ++round;
    }
    if (res.rounds.empty())
        res.diagnostic = "sample stream ended before the first quorum of " + std::to_string(quorum) + " robots";
    else
        res.final_weights = global;
    return res;
}

RunResult run_flow_fl(const ExperimentData& data, const netsim::CommGraphTimeline& timeline, const FlConfig& config) {
    check_config(data, config);
    if (timeline.robots() != data.robots) throw ConfigError("communication graph swarm size differs from the data's");
    RunResult res;
    res.variant = VariantKind::flow_fl;
    const auto model = learner::make_model(config.arch);
    const std::size_t quorum = config.scheduler.quorum();
    const learner::ModelWeights init = initial_weights(config);

    std::vector<flsched::FlowRobot> robots;
    robots.reserve(data.robots);
    for (RobotId r = 0; r < data.robots; ++r) robots.emplace_back(r, config.scheduler, init);

    netsim::Network net(timeline, config.loss_probability, make_stream(config.seed, "netsim/loss"));
    const auto events = arrivals(data);
    const Tick last_arrival = events.empty() ? 0 : events.back().tick;

    struct RoundLog {
        std::vector<Tick> ready_ticks;
        std::map<RobotId, Tick> passed;
        std::map<RobotId, Tick> completed;
        std::map<RobotId, Tick> abandoned;
        std::map<RobotId, WeightContribution> published;
        std::map<RobotId, RoundData> round_data;
    };
    std::map<std::uint64_t, RoundLog> log;

    std::size_t next = 0;
    std::vector<std::vector<std::size_t>> due(data.robots);
    bool exhausted = false;
    while (true) {
        const Tick t = net.now();
        if (t >= timeline.end_tick()) {
            exhausted = true;
            break;
        }
        if (t > last_arrival && net.in_flight() == 0 &&
            std::all_of(robots.begin(), robots.end(),
                        [](const auto& r) { return r.state().phase == flsched::Phase::idle; }))
            break;

        for (auto& d : due) d.clear();
        for (; next < events.size() && events[next].tick == t; ++next) due[events[next].robot].push_back(events[next].sample);

        const auto report = net.step([&](RobotId r, Tick now, const std::vector<const netsim::Payload*>& inbox,
                                         std::vector<netsim::Payload>& out) {
            robots[r].on_tick(now, due[r], inbox, timeline.neighbors(now, r), out);
        });
        res.messages_sent += report->sent;

        auto absorb_events = [&] {
            for (auto& robot : robots) {
                for (const auto& e : robot.drain_events()) {
                    auto& rl = log[e.round];
                    switch (e.kind) {
                        case flsched::EventKind::became_ready: rl.ready_ticks.push_back(e.tick); break;
                        case flsched::EventKind::passed_quorum: rl.passed[e.robot] = e.tick; break;
                        case flsched::EventKind::completed: rl.completed[e.robot] = e.tick; break;
                        case flsched::EventKind::abandoned: rl.abandoned[e.robot] = e.tick; break;
                        case flsched::EventKind::published: break;
                    }
                }
            }
        };
        absorb_events();

        // Learners train between ticks; their updates go out with the next tick.
        std::vector<RobotId> learners;
        for (auto& robot : robots)
            if (robot.plan()) learners.push_back(robot.id());
        if (learners.empty()) continue;
        std::vector<learner::ModelWeights> starts;
        std::vector<RoundData> rd(learners.size());
        for (std::size_t k = 0; k < learners.size(); ++k) {
            auto& robot = robots[learners[k]];
            starts.push_back(robot.retrieve_and_aggregate());
            rd[k] = round_data(data, robot.plan()->samples, config);
        }
        std::vector<WeightContribution> updates(learners.size());
        detail::parallel_for(learners.size(), config.threads, [&](std::size_t k) {
            updates[k] = local_update(*model, starts[k], rd[k], config, learners[k], robots[learners[k]].plan()->round);
        });
        for (std::size_t k = 0; k < learners.size(); ++k) {
            const std::uint64_t r = updates[k].round;
            robots[learners[k]].on_training_done(updates[k], net.now());
            auto& rl = log[r];
            rl.published[learners[k]] = updates[k];
            rl.round_data[learners[k]] = std::move(rd[k]);
        }
        absorb_events();
    }
    res.trace_digest = net.trace_digest();

    for (auto& [round, rl] : log) {
        if (rl.passed.empty()) continue;
        metrics::RoundRecord rec;
        rec.round = round;
        rec.variant = VariantKind::flow_fl;
        std::sort(rl.ready_ticks.begin(), rl.ready_ticks.end());
        Tick first_pass = std::numeric_limits<Tick>::max();
        for (const auto& [r, tick] : rl.passed) {
            rec.start_tick = std::max(rec.start_tick, tick);
            first_pass = std::min(first_pass, tick);
        }
        rec.quorum_tick = rl.ready_ticks.size() >= quorum ? rl.ready_ticks[quorum - 1] : first_pass;
        rec.barrier_wait_ticks = rec.start_tick - rec.quorum_tick;
        rec.end_tick = rec.start_tick;
        rec.complete = true;
        for (const auto& [r, tick] : rl.passed) {
            // A learner that shared its update but gave up waiting at the
            // completion barrier still counts; its end is when it gave up.
            auto it = rl.completed.find(r);
            auto gave_up = rl.abandoned.find(r);
            if (it != rl.completed.end()) {
                rec.end_tick = std::max(rec.end_tick, it->second);
            } else if (gave_up != rl.abandoned.end() && rl.published.count(r)) {
                rec.end_tick = std::max(rec.end_tick, gave_up->second);
            } else {
                rec.complete = false;
                rec.end_tick = std::max(rec.end_tick, net.now());
            }
            auto rd = rl.round_data.find(r);
            rec.learners.push_back({r, rd == rl.round_data.end() ? 0 : rd->second.train.size(),
                                    rd == rl.round_data.end() ? 0 : rd->second.validation.size()});
        }
        if (rl.published.empty()) {
            rec.complete = false;
            rec.federated_validation_loss = std::numeric_limits<double>::quiet_NaN();
            res.rounds.push_back(rec);
            res.round_weights.push_back(init);
            res.loss_curve.push_back(rec.federated_validation_loss);
            continue;
        }
        std::vector<WeightContribution> contribs;
        std::vector<const RoundData*> views;
        for (const auto& [r, c] : rl.published) {
            contribs.push_back(c);
            views.push_back(&rl.round_data.at(r));
        }
        const auto agg = fedavg(contribs);
        rec.federated_validation_loss = federated_loss(*model, agg, views);
        res.rounds.push_back(rec);
        res.round_weights.push_back(agg);
        res.loss_curve.push_back(rec.federated_validation_loss);
    }

    for (std::size_t k = res.rounds.size(); k-- > 0;) {
        if (res.rounds[k].complete) {
            res.final_weights = res.round_weights[k];
            break;
        }
    }
    for (const auto& robot : robots) res.robot_views.push_back(robot.current_view());
    if (res.rounds.empty())
        res.diagnostic = "no round reached quorum before the data ended";
    else if (exhausted && !res.rounds.back().complete)
        res.diagnostic = "timeline ended during round " + std::to_string(res.rounds.back().round);
    return res;
}

}  // namespace flowfl::aggregate
