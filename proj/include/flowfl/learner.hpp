#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowfl/rng.hpp"
#include "flowfl/types.hpp"

namespace flowfl::learner {

enum class ModelKind : std::uint8_t { lstm, linear };

// Shape of a forecasting model. The LSTM default is one layer of 16 units
// reading 32 planar points and emitting 48 future points through a dense head.
struct ArchDescriptor {
    ModelKind kind = ModelKind::lstm;
    std::size_t hidden = 16;
    std::size_t history = 32;
    std::size_t horizon = 48;

    static ArchDescriptor lstm(std::size_t hidden = 16, std::size_t history = 32, std::size_t horizon = 48) {
        return {ModelKind::lstm, hidden, history, horizon};
    }
    static ArchDescriptor linear(std::size_t history = 32, std::size_t horizon = 48) {
        return {ModelKind::linear, 0, history, horizon};
    }

    std::size_t input_dim() const { return 2; }
    std::size_t output_dim() const { return 2 * horizon; }
    std::size_t param_count() const;
    std::string describe() const;
    std::uint64_t hash() const;

    friend bool operator==(const ArchDescriptor&, const ArchDescriptor&) = default;
};

struct ModelWeights {
    ArchDescriptor arch;
    std::vector<double> values;

    std::size_t count() const { return values.size(); }
    friend bool operator==(const ModelWeights&, const ModelWeights&) = default;
};

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when training produces a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainingPair {
    Trajectory input;   // history points
    Trajectory target;  // horizon points
};

using TrainingBatch = std::vector<TrainingPair>;

// Cuts (input, target) pairs out of one recorded trajectory. Without sliding
// a single pair at offset 0 is produced; with sliding every offset that fits.
std::vector<TrainingPair> make_pairs(std::span<const Point2> points, std::size_t history, std::size_t horizon,
                                     bool sliding);

// Uniform in +-1/sqrt(fan_in) per layer; one seed gives every robot the same start.
ModelWeights init_weights(const ArchDescriptor& arch, Rng& rng);
ModelWeights zero_weights(const ArchDescriptor& arch);

class Model {
public:
    virtual ~Model() = default;

    virtual const ArchDescriptor& arch() const = 0;

    // Width of the dropout mask this model consumes (0: no dropout site).
    virtual std::size_t dropout_width() const = 0;

    // dropout_scale is empty in evaluation mode, otherwise one multiplier per
    // dropout unit (0 or 1/(1-rate)).
    virtual Trajectory forward(std::span<const double> w, const Trajectory& input,
                               std::span<const double> dropout_scale = {}) const = 0;

    // Squared error averaged over all output components for one pair; the
    // gradient of that loss is added into grad.
    virtual double loss_and_gradient(std::span<const double> w, const TrainingPair& pair,
                                     std::span<const double> dropout_scale, std::span<double> grad) const = 0;
};

std::unique_ptr<Model> make_model(const ArchDescriptor& arch);

double mse_loss(const Trajectory& predicted, const Trajectory& target);

enum class OptimizerKind : std::uint8_t { rmsprop, sgd };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::rmsprop;
    double learning_rate = 1e-3;
    double rms_decay = 0.9;
    double epsilon = 1e-7;
};

struct OptimizerState {
    OptimizerConfig config;
    std::vector<double> accumulators;

    explicit OptimizerState(OptimizerConfig cfg = {}, std::size_t params = 0)
        : config(cfg), accumulators(params, 0.0) {}

    void apply(std::span<double> weights, std::span<const double> grad);
};

struct TrainConfig {
    std::size_t minibatch_size = 32;
    double dropout_rate = 0.2;
};

struct EpochResult {
    double mean_loss = 0.0;  // sample-weighted mean of minibatch training losses
    std::size_t steps = 0;
};

// Mean loss over the pairs with the gradient of that mean accumulated into grad.
double batch_loss_and_gradient(const Model& model, std::span<const double> w, std::span<const TrainingPair> pairs,
                               std::span<const std::size_t> order, Rng* dropout_rng, double dropout_rate,
                               std::span<double> grad);

// One shuffled pass over the batch with an optimizer update per minibatch.
EpochResult train_epoch(const Model& model, ModelWeights& weights, std::span<const TrainingPair> batch,
                        OptimizerState& optimizer, Rng& rng, const TrainConfig& config);

// Mean MSE in evaluation mode; nullopt for an empty set.
std::optional<double> validation_loss(const Model& model, const ModelWeights& weights,
                                      std::span<const TrainingPair> validation);

std::vector<Trajectory> predict_all(const Model& model, const ModelWeights& weights,
                                    std::span<const TrainingPair> pairs);

// Portable encoding: architecture hash (u64 LE) followed by every value as an
// IEEE-754 binary32 in little-endian byte order.
Bytes serialize_weights(const ModelWeights& weights);
ModelWeights deserialize_weights(std::span<const std::uint8_t> bytes, const ArchDescriptor& arch);

void write_weights_file(const std::string& path, const ModelWeights& weights);
ModelWeights read_weights_file(const std::string& path, const ArchDescriptor& arch);

}  // namespace flowfl::learner
