#include "flowfl/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace flowfl {

std::string to_string(VariantKind v) {
    switch (v) {
        case VariantKind::centralized: return "centralized";
        case VariantKind::server_fl: return "server_fl";
        case VariantKind::flow_fl: return "flow_fl";
    }
    return "unknown";
}

VariantKind parse_variant(const std::string& s) {
    if (s == "centralized") return VariantKind::centralized;
    if (s == "server_fl" || s == "server-fl") return VariantKind::server_fl;
    if (s == "flow_fl" || s == "flow-fl") return VariantKind::flow_fl;
    throw ConfigError("unknown variant '" + s + "'");
}

}  // namespace flowfl

namespace flowfl::metrics {

namespace {

void check_shapes(std::span<const Trajectory> predicted, std::span<const Trajectory> truth) {
    if (predicted.empty()) throw std::invalid_argument("displacement error of an empty set");
    if (predicted.size() != truth.size()) throw std::invalid_argument("prediction and truth counts differ");
    const std::size_t horizon = truth.front().size();
    if (horizon == 0) throw std::invalid_argument("empty trajectories");
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (predicted[i].size() != horizon || truth[i].size() != horizon)
            throw std::invalid_argument("trajectory lengths differ");
}

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

double ade(std::span<const Trajectory> predicted, std::span<const Trajectory> truth) {
    check_shapes(predicted, truth);
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        for (std::size_t t = 0; t < truth[i].size(); ++t) acc += distance(predicted[i][t], truth[i][t]);
    return acc / static_cast<double>(truth.size() * truth.front().size());
}

double fde(std::span<const Trajectory> predicted, std::span<const Trajectory> truth) {
    check_shapes(predicted, truth);
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) acc += distance(predicted[i].back(), truth[i].back());
    return acc / static_cast<double>(truth.size());
}

double federated_validation_loss(std::span<const LossShare> shares) {
    std::size_t total = 0;
    for (const auto& s : shares) total += s.samples;
    if (total == 0) throw std::invalid_argument("federated loss over zero samples");
    double acc = 0.0;
    for (const auto& s : shares) acc += static_cast<double>(s.samples) / static_cast<double>(total) * s.loss;
    return acc;
}

std::optional<std::size_t> stopping_round(std::span<const double> curve, const StoppingCriterion& criterion,
                                          std::string* diagnostic) {
    const std::size_t w = criterion.window;
    if (w == 0) throw std::invalid_argument("stopping window must be positive");
    if (curve.size() < w + 1) {
        if (diagnostic) {
            std::ostringstream os;
            os << "loss curve has " << curve.size() << " points; need at least " << w + 1;
            *diagnostic = os.str();
        }
        return std::nullopt;
    }
    auto window_mean = [&](std::size_t last) {
        double acc = 0.0;
        for (std::size_t k = last + 1 - w; k <= last; ++k) acc += curve[k];
        return acc / static_cast<double>(w);
    };
    for (std::size_t r = w; r < curve.size(); ++r)
        if (std::abs(window_mean(r) - window_mean(r - 1)) < criterion.threshold) return r;
    if (diagnostic) *diagnostic = "windowed loss never settled below the threshold";
    return std::nullopt;
}

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double stdev(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

TimingReport timing_report(std::span<const RoundRecord> records) {
    if (records.size() < 2) throw std::invalid_argument("timing report needs at least two rounds");
    TimingReport rep;
    for (std::size_t k = 1; k < records.size(); ++k) {
        const Tick gap = records[k].start_tick - records[k - 1].start_tick;
        rep.gap_ticks.push_back(gap);
        rep.gap_seconds.push_back(ticks_to_seconds(gap));
    }
    std::vector<double> waits;
    for (const auto& r : records) waits.push_back(static_cast<double>(r.barrier_wait_ticks));
    rep.mean_barrier_wait = mean(waits);
    rep.stdev_barrier_wait = stdev(waits);
    return rep;
}

}  // namespace flowfl::metrics
