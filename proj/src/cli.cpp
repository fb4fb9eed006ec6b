#include "flowfl/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowfl/dataio.hpp"
#include "flowfl/rng.hpp"

namespace flowfl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string fmt_opt(std::optional<double> v) { return v ? dataio::format_double(*v) : std::string(); }

double parse_real(std::string_view s, const std::string& what) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw DataError("bad number in " + what + ": " + std::string(s));
    return v;
}

template <typename Int>
Int parse_int(std::string_view s, const std::string& what) {
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw DataError("bad integer in " + what + ": " + std::string(s));
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::size_t thread_cap() {
    const char* env = std::getenv("FLOWFL_THREADS");
    if (!env || !*env) return 0;
    try {
        const long v = std::stol(env);
        return v > 0 ? static_cast<std::size_t>(v) : 1;
    } catch (const std::exception&) {
        throw ConfigError("FLOWFL_THREADS must be a positive integer");
    }
}

learner::ArchDescriptor arch_of(const RunConfig& c) {
    if (c.model == "lstm") return learner::ArchDescriptor::lstm();
    if (c.model == "linear") return learner::ArchDescriptor::linear();
    throw ConfigError("unknown model: " + c.model);
}

}  // namespace

void validate(const RunConfig& c) {
    if (c.robots < 1) throw ConfigError("robots must be >= 1");
    if (!(c.quorum_fraction > 0.0 && c.quorum_fraction <= 1.0)) throw ConfigError("quorum fraction must be in (0, 1]");
    if (c.quota < 1) throw ConfigError("quota must be >= 1");
    if (c.local_epochs < 1) throw ConfigError("local epochs must be >= 1");
    if (!(c.loss_probability >= 0.0 && c.loss_probability <= 1.0))
        throw ConfigError("loss probability must be in [0, 1]");
    if (!(c.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(c.rms_decay >= 0.0 && c.rms_decay < 1.0)) throw ConfigError("rms decay must be in [0, 1)");
    if (!(c.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (c.minibatch < 1) throw ConfigError("minibatch must be >= 1");
    if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
    if (c.epochs && *c.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (c.threads < 1) throw ConfigError("threads must be >= 1");
    if (c.duration < static_cast<Tick>(dataio::kSampleLength)) throw ConfigError("duration too short");
    if (!(c.noise_sigma >= 0.0)) throw ConfigError("noise must be >= 0");
    if (c.out.empty()) throw ConfigError("output directory required");
    arch_of(c);
    if (c.inference_model != "aggregate" && c.inference_model != "local")
        throw ConfigError("inference model must be aggregate or local");
    if (c.optimizer != "rmsprop" && c.optimizer != "sgd") throw ConfigError("unknown optimizer: " + c.optimizer);
    if (c.synthetic) {
        dataio::parse_behavior(*c.synthetic);
        if (!c.trajectory_file.empty()) throw ConfigError("--synthetic and --trajectory-file are exclusive");
    } else {
        if (c.trajectory_file.empty()) throw ConfigError("a trajectory file or --synthetic is required");
        if (c.variant == VariantKind::flow_fl && c.comm_graph_file.empty())
            throw ConfigError("flow_fl needs --comm-graph-file");
    }
}

std::string to_json(const RunConfig& c) {
    json j;
    j["variant"] = to_string(c.variant);
    j["robots"] = c.robots;
    j["quorum_fraction"] = c.quorum_fraction;
    j["quota"] = c.quota;
    j["local_epochs"] = c.local_epochs;
    j["seed"] = c.seed;
    j["loss_probability"] = c.loss_probability;
    j["trajectory_file"] = c.trajectory_file;
    j["comm_graph_file"] = c.comm_graph_file;
    j["synthetic"] = c.synthetic ? json(*c.synthetic) : json(nullptr);
    j["duration"] = c.duration;
    j["noise_sigma"] = c.noise_sigma;
    j["model"] = c.model;
    j["optimizer"] = c.optimizer;
    j["learning_rate"] = c.learning_rate;
    j["rms_decay"] = c.rms_decay;
    j["epsilon"] = c.epsilon;
    j["minibatch"] = c.minibatch;
    j["dropout"] = c.dropout;
    j["sliding_windows"] = c.sliding_windows;
    j["epochs"] = c.epochs ? json(*c.epochs) : json(nullptr);
    j["baseline"] = c.baseline;
    j["threads"] = c.threads;
    j["inference_model"] = c.inference_model;
    j["emit_dataset"] = c.emit_dataset;
    j["out"] = c.out;
    return j.dump(2) + "\n";
}

RunConfig from_json(const std::string& text, RunConfig c) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "variant") c.variant = parse_variant(v.get<std::string>());
            else if (key == "robots") c.robots = v.get<std::size_t>();
            else if (key == "quorum_fraction") c.quorum_fraction = v.get<double>();
            else if (key == "quota") c.quota = v.get<std::size_t>();
            else if (key == "local_epochs") c.local_epochs = v.get<std::size_t>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "loss_probability") c.loss_probability = v.get<double>();
            else if (key == "trajectory_file") c.trajectory_file = v.get<std::string>();
            else if (key == "comm_graph_file") c.comm_graph_file = v.get<std::string>();
            else if (key == "synthetic") c.synthetic = v.is_null() ? std::nullopt : std::optional(v.get<std::string>());
            else if (key == "duration") c.duration = v.get<Tick>();
            else if (key == "noise_sigma") c.noise_sigma = v.get<double>();
            else if (key == "model") c.model = v.get<std::string>();
            else if (key == "optimizer") c.optimizer = v.get<std::string>();
            else if (key == "learning_rate") c.learning_rate = v.get<double>();
            else if (key == "rms_decay") c.rms_decay = v.get<double>();
            else if (key == "epsilon") c.epsilon = v.get<double>();
            else if (key == "minibatch") c.minibatch = v.get<std::size_t>();
            else if (key == "dropout") c.dropout = v.get<double>();
            else if (key == "sliding_windows") c.sliding_windows = v.get<bool>();
            else if (key == "epochs") c.epochs = v.is_null() ? std::nullopt : std::optional(v.get<std::size_t>());
            else if (key == "baseline") c.baseline = v.get<bool>();
            else if (key == "threads") c.threads = v.get<std::size_t>();
            else if (key == "inference_model") c.inference_model = v.get<std::string>();
            else if (key == "emit_dataset") c.emit_dataset = v.get<bool>();
            else if (key == "out") c.out = v.get<std::string>();
            else throw ConfigError("unknown config key: " + key);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
    return c;
}

std::optional<RunConfig> parse_config(const std::vector<std::string>& args, std::string* help_text, bool* sweep_flag) {
    CLI::App app{"Serverless federated learning over a simulated robot swarm"};
    app.name("flowfl");

    std::string config_file;
    std::optional<std::string> variant, trajectory, comm_graph, synthetic, model, optimizer, out, inference;
    std::optional<std::size_t> robots, quota, local_epochs, minibatch, epochs, threads;
    std::optional<double> quorum_fraction, loss_probability, lr, rms_decay, epsilon, dropout, noise;
    std::optional<std::uint64_t> seed;
    std::optional<Tick> duration;
    bool sliding = false, baseline = false, do_sweep = false, emit = false;

    app.add_option("--config", config_file, "JSON file of settings (flags win)");
    app.add_option("--variant", variant, "flow_fl | server_fl | centralized");
    app.add_option("--robots", robots, "swarm size K");
    app.add_option("--quorum-fraction", quorum_fraction, "quorum fraction q_F in (0, 1]");
    app.add_option("--quota", quota, "samples a robot buffers before it is ready");
    app.add_option("--local-epochs", local_epochs, "local epochs E per round");
    app.add_option("--seed", seed, "seed for every random stream");
    app.add_option("--trajectory-file", trajectory, "neighbour trajectory dataset");
    app.add_option("--comm-graph-file", comm_graph, "communication graph timeline");
    app.add_option("--synthetic", synthetic, "generate data: straight_bounce | circle | waypoint");
    app.add_option("--duration", duration, "synthetic experiment length in ticks");
    app.add_option("--noise", noise, "synthetic position noise sigma (m)");
    app.add_option("--loss-probability", loss_probability, "per-broadcast loss probability");
    app.add_option("--model", model, "lstm | linear");
    app.add_option("--optimizer", optimizer, "rmsprop | sgd");
    app.add_option("--learning-rate", lr);
    app.add_option("--rms-decay", rms_decay);
    app.add_option("--epsilon", epsilon);
    app.add_option("--minibatch", minibatch);
    app.add_option("--dropout", dropout);
    app.add_flag("--sliding-windows", sliding, "every window offset of a recording becomes a pair");
    app.add_option("--epochs", epochs, "centralized epochs (default: companion round count)");
    app.add_flag("--baseline", baseline, "also train the centralized baseline");
    app.add_option("--threads", threads, "learner threads (capped by FLOWFL_THREADS)");
    app.add_option("--inference-model", inference, "aggregate | local (each robot's own view)");
    app.add_flag("--emit-dataset", emit, "write trajectories.txt and comm_graph.txt to the output");
    app.add_option("--out", out, "output directory");
    app.add_flag("--sweep", do_sweep, "run the (q_F, quota) grid {0.2,0.6} x {20,60}");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        if (help_text) *help_text = app.help();
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }

    RunConfig c;
    c.threads = std::max(1u, std::thread::hardware_concurrency());
    if (!config_file.empty()) c = from_json(read_file(config_file), c);
    if (variant) c.variant = parse_variant(*variant);
    if (robots) c.robots = *robots;
    if (quorum_fraction) c.quorum_fraction = *quorum_fraction;
    if (quota) c.quota = *quota;
    if (local_epochs) c.local_epochs = *local_epochs;
    if (seed) c.seed = *seed;
    if (trajectory) c.trajectory_file = *trajectory;
    if (comm_graph) c.comm_graph_file = *comm_graph;
    if (synthetic) c.synthetic = *synthetic;
    if (duration) c.duration = *duration;
    if (noise) c.noise_sigma = *noise;
    if (loss_probability) c.loss_probability = *loss_probability;
    if (model) c.model = *model;
    if (optimizer) c.optimizer = *optimizer;
    if (lr) c.learning_rate = *lr;
    if (rms_decay) c.rms_decay = *rms_decay;
    if (epsilon) c.epsilon = *epsilon;
    if (minibatch) c.minibatch = *minibatch;
    if (dropout) c.dropout = *dropout;
    if (sliding) c.sliding_windows = true;
    if (epochs) c.epochs = *epochs;
    if (baseline) c.baseline = true;
    if (threads) c.threads = *threads;
    if (inference) c.inference_model = *inference;
    if (emit) c.emit_dataset = true;
    if (out) c.out = *out;
    if (sweep_flag) *sweep_flag = do_sweep;
    validate(c);
    return c;
}

aggregate::FlConfig fl_config(const RunConfig& c) {
    aggregate::FlConfig f;
    f.scheduler.robots = c.robots;
    f.scheduler.quorum_fraction = c.quorum_fraction;
    f.scheduler.quota = c.quota;
    f.scheduler.local_epochs = c.local_epochs;
    f.arch = arch_of(c);
    f.optimizer.kind = c.optimizer == "sgd" ? learner::OptimizerKind::sgd : learner::OptimizerKind::rmsprop;
    f.optimizer.learning_rate = c.learning_rate;
    f.optimizer.rms_decay = c.rms_decay;
    f.optimizer.epsilon = c.epsilon;
    f.train.minibatch_size = c.minibatch;
    f.train.dropout_rate = c.dropout;
    f.sliding_windows = c.sliding_windows;
    f.seed = c.seed;
    f.loss_probability = c.loss_probability;
    const std::size_t cap = thread_cap();
    f.threads = cap ? std::min(c.threads, cap) : c.threads;
    return f;
}

std::string cell_name(double quorum_fraction, std::size_t quota) {
    return "qf" + dataio::format_double(quorum_fraction) + "_quota" + std::to_string(quota);
}

void write_rounds_csv(const std::string& path, const std::vector<metrics::RoundRecord>& rounds) {
    std::ostringstream s;
    s << "round,variant,quorum_tick,start_tick,end_tick,barrier_wait_ticks,learners,federated_validation_loss,complete\n";
    for (const auto& r : rounds) {
        s << r.round << ',' << to_string(r.variant) << ',' << r.quorum_tick << ',' << r.start_tick << ','
          << r.end_tick << ',' << r.barrier_wait_ticks << ',';
        for (std::size_t k = 0; k < r.learners.size(); ++k) {
            const auto& l = r.learners[k];
            s << (k ? ";" : "") << l.robot << ':' << l.n_train << ':' << l.n_validation;
        }
        s << ',' << dataio::format_double(r.federated_validation_loss) << ',' << (r.complete ? 1 : 0) << '\n';
    }
    write_file(path, s.str());
}

std::vector<metrics::RoundRecord> read_rounds_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::getline(in, line);
    if (line.rfind("round,variant,", 0) != 0) throw DataError(path + ": unexpected header");
    std::vector<metrics::RoundRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 9) throw DataError(path + ": expected 9 fields: " + line);
        metrics::RoundRecord r;
        r.round = parse_int<std::size_t>(f[0], path);
        r.variant = parse_variant(std::string(f[1]));
        r.quorum_tick = parse_int<Tick>(f[2], path);
        r.start_tick = parse_int<Tick>(f[3], path);
        r.end_tick = parse_int<Tick>(f[4], path);
        r.barrier_wait_ticks = parse_int<Tick>(f[5], path);
        if (!f[6].empty()) {
            for (auto item : split(f[6], ';')) {
                const auto p = split(item, ':');
                if (p.size() != 3) throw DataError(path + ": bad learner entry");
                r.learners.push_back({parse_int<RobotId>(p[0], path), parse_int<std::size_t>(p[1], path),
                                      parse_int<std::size_t>(p[2], path)});
            }
        }
        r.federated_validation_loss = parse_real(f[7], path);
        r.complete = parse_int<int>(f[8], path) != 0;
        out.push_back(std::move(r));
    }
    return out;
}

void write_losses_csv(const std::string& path, const std::vector<LossRow>& rows) {
    std::ostringstream s;
    s << "iteration,federated_validation_loss,centralized_validation_loss\n";
    for (const auto& r : rows) s << r.iteration << ',' << fmt_opt(r.loss) << ',' << fmt_opt(r.baseline) << '\n';
    write_file(path, s.str());
}

std::vector<LossRow> read_losses_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::getline(in, line);
    if (line != "iteration,federated_validation_loss,centralized_validation_loss")
        throw DataError(path + ": unexpected header");
    std::vector<LossRow> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 3) throw DataError(path + ": expected 3 fields: " + line);
        LossRow r;
        r.iteration = parse_int<std::size_t>(f[0], path);
        if (!f[1].empty()) r.loss = parse_real(f[1], path);
        if (!f[2].empty()) r.baseline = parse_real(f[2], path);
        out.push_back(r);
    }
    return out;
}

RunSummary run(const RunConfig& config) {
    validate(config);
    const fs::path out(config.out);
    fs::create_directories(out);
    write_file(out / "config.json", to_json(config));

    // Data.
    std::vector<dataio::TrajectorySample> samples;
    std::optional<netsim::CommGraphTimeline> timeline;
    Tick duration = 0;
    json dataset;
    if (config.synthetic) {
        dataio::SyntheticMotionConfig sc;
        sc.robots = config.robots;
        sc.behavior = dataio::parse_behavior(*config.synthetic);
        sc.noise_sigma = config.noise_sigma;
        sc.duration = config.duration;
        sc.seed = config.seed;
        auto ds = dataio::synthesize(sc);
        std::ostringstream text;
        dataio::write_trajectories(text, ds.samples);
        dataset["synthetic"] = dataio::to_string(sc.behavior);
        dataset["trajectory_hash"] = hex64(fnv1a64(text.str()));
        samples = std::move(ds.samples);
        timeline = std::move(ds.timeline);
        duration = sc.duration;
    } else {
        auto load = dataio::load_trajectory_file(config.trajectory_file);
        samples = std::move(load.samples);
        dataset["trajectory_file"] = config.trajectory_file;
        dataset["trajectory_hash"] = hex64(fnv1a64(read_file(config.trajectory_file)));
        dataset["rejected_samples"] = load.report.rejected_samples;
        for (const auto& s : samples) duration = std::max(duration, s.available_at());
        if (!config.comm_graph_file.empty()) {
            auto g = dataio::load_comm_graph(config.comm_graph_file, config.robots);
            dataset["comm_graph_file"] = config.comm_graph_file;
            dataset["comm_graph_hash"] = hex64(fnv1a64(read_file(config.comm_graph_file)));
            duration = std::max(duration, g.timeline.end_tick());
            timeline = std::move(g.timeline);
        }
    }
    if (config.emit_dataset) {
        dataio::write_trajectory_file((out / "trajectories.txt").string(), samples);
        if (timeline) dataio::write_comm_graph_file((out / "comm_graph.txt").string(), *timeline);
    }
    const auto data = aggregate::ExperimentData::from_samples(samples, config.robots, duration);
    const auto fl = fl_config(config);
    const auto model = learner::make_model(fl.arch);

    RunSummary summary;
    std::optional<learner::ModelWeights> final_weights;
    std::vector<learner::ModelWeights> views;
    json extra;
    auto companion = [&] {
        return timeline ? aggregate::run_flow_fl(data, *timeline, fl) : aggregate::run_server_fl(data, fl);
    };
    if (config.variant == VariantKind::centralized) {
        std::size_t epochs = 0;
        if (config.epochs) {
            epochs = *config.epochs;
        } else {
            epochs = companion().rounds.size();
            if (epochs == 0) summary.diagnostic = "companion federated run completed no rounds";
        }
        auto c = aggregate::run_centralized(data, epochs, fl);
        summary.losses = c.loss_curve;
        final_weights = c.final_weights;
        extra["epochs"] = epochs;
        extra["pooled_samples"] = c.pooled_samples;
    } else {
        auto res = config.variant == VariantKind::flow_fl
                       ? aggregate::run_flow_fl(data, timeline.value(), fl)
                       : aggregate::run_server_fl(data, fl);
        summary.rounds = res.rounds;
        summary.losses = res.loss_curve;
        summary.diagnostic = res.diagnostic;
        final_weights = res.final_weights;
        views = res.robot_views;
        extra["messages_sent"] = res.messages_sent;
        if (config.variant == VariantKind::flow_fl) extra["trace_digest"] = hex64(res.trace_digest);
        if (config.baseline) {
            const std::size_t epochs = config.epochs.value_or(res.rounds.size());
            summary.baseline = aggregate::run_centralized(data, epochs, fl).loss_curve;
        }
    }
    if (!final_weights) final_weights = aggregate::initial_weights(fl);

    std::vector<learner::TrainingPair> test;
    for (const auto& s : data.test) {
        auto p = learner::make_pairs(s.points, fl.arch.history, fl.arch.horizon, false);
        test.insert(test.end(), p.begin(), p.end());
    }
    if (!test.empty()) {
        std::vector<Trajectory> truth;
        for (const auto& p : test) truth.push_back(p.target);
        if (config.inference_model == "local" && !views.empty()) {
            double a = 0.0, f = 0.0;
            for (const auto& v : views) {
                const auto pred = learner::predict_all(*model, v, test);
                a += metrics::ade(pred, truth);
                f += metrics::fde(pred, truth);
            }
            summary.ade = a / static_cast<double>(views.size());
            summary.fde = f / static_cast<double>(views.size());
        } else {
            const auto pred = learner::predict_all(*model, *final_weights, test);
            summary.ade = metrics::ade(pred, truth);
            summary.fde = metrics::fde(pred, truth);
        }
    }
    std::string stop_diag;
    summary.stopping_round = metrics::stopping_round(summary.losses, {}, &stop_diag);

    write_rounds_csv((out / "rounds.csv").string(), summary.rounds);
    std::vector<LossRow> rows;
    for (std::size_t i = 0; i < std::max(summary.losses.size(), summary.baseline.size()); ++i) {
        LossRow r{i, std::nullopt, std::nullopt};
        if (i < summary.losses.size()) r.loss = summary.losses[i];
        if (i < summary.baseline.size()) r.baseline = summary.baseline[i];
        rows.push_back(r);
    }
    write_losses_csv((out / "losses.csv").string(), rows);
    learner::write_weights_file((out / "weights.bin").string(), *final_weights);

    json m;
    m["variant"] = to_string(config.variant);
    m["rounds"] = summary.rounds.size();
    m["final_loss"] = summary.losses.empty() ? json(nullptr) : json(summary.losses.back());
    m["ade"] = summary.ade ? json(*summary.ade) : json(nullptr);
    m["fde"] = summary.fde ? json(*summary.fde) : json(nullptr);
    m["stopping_round"] = summary.stopping_round ? json(*summary.stopping_round) : json(nullptr);
    if (!stop_diag.empty()) m["stopping_diagnostic"] = stop_diag;
    m["test_pairs"] = test.size();
    m["inference_model"] = config.inference_model;
    if (summary.rounds.size() >= 2) {
        const auto t = metrics::timing_report(summary.rounds);
        const std::vector<double> gaps(t.gap_ticks.begin(), t.gap_ticks.end());
        m["timing"] = {{"mean_gap_ticks", metrics::mean(gaps)},
                       {"mean_gap_seconds", metrics::mean(t.gap_seconds)},
                       {"mean_barrier_wait_ticks", t.mean_barrier_wait},
                       {"stdev_barrier_wait_ticks", t.stdev_barrier_wait}};
    }
    m["diagnostic"] = summary.diagnostic;
    m.update(extra);
    write_file(out / "metrics.json", m.dump(2) + "\n");

    // Everything that determines the artifacts; thread count does not.
    json manifest;
    manifest["config"] = json::parse(to_json(config));
    manifest["config"].erase("threads");
    manifest["config"].erase("out");
    manifest["seed"] = config.seed;
    manifest["dataset"] = dataset;
    manifest["architecture"] = fl.arch.describe();
    manifest["architecture_hash"] = hex64(fl.arch.hash());
    manifest["weights_hash"] = hex64(fnv1a64(read_file((out / "weights.bin").string())));
    write_file(out / "manifest.json", manifest.dump(2) + "\n");
    return summary;
}

std::vector<std::string> sweep(const RunConfig& base, const std::vector<double>& fractions,
                               const std::vector<std::size_t>& quotas) {
    std::vector<std::string> dirs;
    for (double qf : fractions) {
        for (std::size_t quota : quotas) {
            RunConfig c = base;
            c.quorum_fraction = qf;
            c.quota = quota;
            c.out = (fs::path(base.out) / cell_name(qf, quota)).string();
            run(c);
            dirs.push_back(c.out);
        }
    }
    return dirs;
}

}  // namespace flowfl::cli
