#include "flowfl/learner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "model_impl.hpp"

namespace flowfl::learner {

std::size_t ArchDescriptor::param_count() const {
    if (kind == ModelKind::lstm) return detail::lstm_param_count(*this);
    return output_dim() * 2 * history + output_dim();
}

std::string ArchDescriptor::describe() const {
    std::ostringstream os;
    if (kind == ModelKind::lstm)
        os << "lstm(in=2,hidden=" << hidden << ",history=" << history << ",out=" << output_dim() << ")";
    else
        os << "linear(in=" << 2 * history << ",out=" << output_dim() << ")";
    return os.str();
}

std::uint64_t ArchDescriptor::hash() const { return fnv1a64(describe()); }

std::vector<TrainingPair> make_pairs(std::span<const Point2> points, std::size_t history, std::size_t horizon,
                                     bool sliding) {
    std::vector<TrainingPair> out;
    const std::size_t span_len = history + horizon;
    if (points.size() < span_len) return out;
    const std::size_t last_offset = sliding ? points.size() - span_len : 0;
    for (std::size_t off = 0; off <= last_offset; ++off) {
        TrainingPair p;
        p.input.assign(points.begin() + off, points.begin() + off + history);
        p.target.assign(points.begin() + off + history, points.begin() + off + span_len);
        out.push_back(std::move(p));
    }
    return out;
}

namespace {

void fill_uniform(std::span<double> v, double bound, Rng& rng) {
    for (double& x : v) x = bound * (2.0 * uniform01(rng) - 1.0);
}

}  // namespace

ModelWeights init_weights(const ArchDescriptor& arch, Rng& rng) {
    ModelWeights w = zero_weights(arch);
    std::span<double> all(w.values);
    if (arch.kind == ModelKind::lstm) {
        const std::size_t H = arch.hidden;
        const std::size_t gate_params = 4 * H * (2 + H + 1);
        fill_uniform(all.first(gate_params), 1.0 / std::sqrt(static_cast<double>(2 + H)), rng);
        fill_uniform(all.subspan(gate_params), 1.0 / std::sqrt(static_cast<double>(H)), rng);
    } else {
        fill_uniform(all, 1.0 / std::sqrt(static_cast<double>(2 * arch.history)), rng);
    }
    return w;
}

ModelWeights zero_weights(const ArchDescriptor& arch) { return ModelWeights{arch, std::vector<double>(arch.param_count(), 0.0)}; }

std::unique_ptr<Model> make_model(const ArchDescriptor& arch) {
    if (arch.history == 0 || arch.horizon == 0) throw ShapeError("history and horizon must be positive");
    if (arch.kind == ModelKind::lstm) {
        if (arch.hidden == 0) throw ShapeError("hidden size must be positive");
        return detail::make_lstm(arch);
    }
    return detail::make_linear(arch);
}

double mse_loss(const Trajectory& predicted, const Trajectory& target) {
    if (predicted.size() != target.size() || predicted.empty())
        throw ShapeError("mse_loss: prediction and target shapes differ");
    double acc = 0.0;
    for (std::size_t k = 0; k < predicted.size(); ++k) {
        const double dx = predicted[k].x - target[k].x;
        const double dy = predicted[k].y - target[k].y;
        acc += dx * dx + dy * dy;
    }
    return acc / static_cast<double>(2 * predicted.size());
}

void OptimizerState::apply(std::span<double> weights, std::span<const double> grad) {
    if (weights.size() != grad.size()) throw ShapeError("gradient size differs from weights");
    const double lr = config.learning_rate;
    if (config.kind == OptimizerKind::sgd) {
        for (std::size_t k = 0; k < weights.size(); ++k) weights[k] -= lr * grad[k];
        return;
    }
    if (accumulators.size() != weights.size()) accumulators.assign(weights.size(), 0.0);
    const double rho = config.rms_decay;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const double g = grad[k];
        accumulators[k] = rho * accumulators[k] + (1.0 - rho) * g * g;
        weights[k] -= lr * g / (std::sqrt(accumulators[k]) + config.epsilon);
    }
}

double batch_loss_and_gradient(const Model& model, std::span<const double> w, std::span<const TrainingPair> pairs,
                               std::span<const std::size_t> order, Rng* dropout_rng, double dropout_rate,
                               std::span<double> grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    if (order.empty()) return 0.0;
    const std::size_t width = model.dropout_width();
    const bool drop = dropout_rng != nullptr && dropout_rate > 0.0 && width > 0;
    std::vector<double> mask(drop ? width : 0);
    const double keep_scale = drop ? 1.0 / (1.0 - dropout_rate) : 1.0;
    double loss = 0.0;
    for (std::size_t idx : order) {
        if (drop)
            for (double& m : mask) m = uniform01(*dropout_rng) < dropout_rate ? 0.0 : keep_scale;
        loss += model.loss_and_gradient(w, pairs[idx], mask, grad);
    }
    const double inv = 1.0 / static_cast<double>(order.size());
    for (double& g : grad) g *= inv;
    return loss * inv;
}

EpochResult train_epoch(const Model& model, ModelWeights& weights, std::span<const TrainingPair> batch,
                        OptimizerState& optimizer, Rng& rng, const TrainConfig& config) {
    if (batch.empty()) throw std::invalid_argument("train_epoch: empty batch");
    if (weights.arch != model.arch()) throw ShapeError("weights do not match model architecture");
    const std::size_t mb = std::max<std::size_t>(1, config.minibatch_size);

    std::vector<std::size_t> order(batch.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    for (std::size_t k = order.size(); k > 1; --k) {
        const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(k));
        std::swap(order[k - 1], order[std::min(j, k - 1)]);
    }

    std::vector<double> grad(weights.values.size());
    EpochResult result;
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += mb) {
        const std::size_t len = std::min(mb, order.size() - start);
        const std::span<const std::size_t> slice(order.data() + start, len);
        const double loss =
            batch_loss_and_gradient(model, weights.values, batch, slice, &rng, config.dropout_rate, grad);
        if (!std::isfinite(loss))
            throw DivergenceError("non-finite training loss at step " + std::to_string(result.steps));
        optimizer.apply(weights.values, grad);
        weighted += loss * static_cast<double>(len);
        ++result.steps;
    }
    result.mean_loss = weighted / static_cast<double>(order.size());
    return result;
}

std::optional<double> validation_loss(const Model& model, const ModelWeights& weights,
                                      std::span<const TrainingPair> validation) {
    if (validation.empty()) return std::nullopt;
    double acc = 0.0;
    for (const auto& p : validation) acc += mse_loss(model.forward(weights.values, p.input), p.target);
    return acc / static_cast<double>(validation.size());
}

std::vector<Trajectory> predict_all(const Model& model, const ModelWeights& weights,
                                    std::span<const TrainingPair> pairs) {
    std::vector<Trajectory> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(model.forward(weights.values, p.input));
    return out;
}

namespace {

void put_u64(Bytes& out, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> in) {
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= std::uint64_t{in[k]} << (8 * k);
    return v;
}

}  // namespace

Bytes serialize_weights(const ModelWeights& weights) {
    if (weights.values.size() != weights.arch.param_count()) throw ShapeError("weights do not match architecture");
    Bytes out;
    out.reserve(8 + 4 * weights.values.size());
    put_u64(out, weights.arch.hash());
    for (double v : weights.values) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
    }
    return out;
}

ModelWeights deserialize_weights(std::span<const std::uint8_t> bytes, const ArchDescriptor& arch) {
    const std::size_t n = arch.param_count();
    if (bytes.size() != 8 + 4 * n) throw ShapeError("weight blob has wrong length for " + arch.describe());
    if (get_u64(bytes) != arch.hash()) throw ShapeError("weight blob architecture hash mismatch");
    ModelWeights w{arch, std::vector<double>(n)};
    for (std::size_t k = 0; k < n; ++k) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= std::uint32_t{bytes[8 + 4 * k + b]} << (8 * b);
        w.values[k] = static_cast<double>(std::bit_cast<float>(bits));
    }
    return w;
}

void write_weights_file(const std::string& path, const ModelWeights& weights) {
    const Bytes b = serialize_weights(weights);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

ModelWeights read_weights_file(const std::string& path, const ArchDescriptor& arch) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    const Bytes b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_weights(b, arch);
}

}  // namespace flowfl::learner
