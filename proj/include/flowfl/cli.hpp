#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowfl/metrics.hpp"
#include "flowfl/types.hpp"
#include "flowfl/variants.hpp"

namespace flowfl::cli {

struct RunConfig {
    VariantKind variant = VariantKind::flow_fl;
    std::size_t robots = 15;
    double quorum_fraction = 0.2;
    std::size_t quota = 20;
    std::size_t local_epochs = 1;
    std::uint64_t seed = 1;
    double loss_probability = 0.0;

    std::string trajectory_file;
    std::string comm_graph_file;
    std::optional<std::string> synthetic;  // behaviour name
    Tick duration = 20000;                  // synthetic only
    double noise_sigma = 0.1;               // synthetic only

    std::string model = "lstm";
    std::string optimizer = "rmsprop";
    double learning_rate = 1e-3;
    double rms_decay = 0.9;
    double epsilon = 1e-7;
    std::size_t minibatch = 32;
    double dropout = 0.2;
    bool sliding_windows = false;

    std::optional<std::size_t> epochs;  // centralized; defaults to the companion run's round count
    bool baseline = false;              // add the centralized curve to losses.csv
    std::size_t threads = 1;
    // "aggregate": evaluate the last complete round's fedavg model.
    // "local": evaluate every robot's own end-of-run view and average.
    std::string inference_model = "aggregate";
    bool emit_dataset = false;  // also write the data in the dataset file formats

    std::string out = "flowfl-out";
};

// Flags override the JSON file named by --config, which overrides defaults.
// Throws ConfigError on unknown flags, bad ranges or a missing dataset.
// Returns nullopt when help was requested (text goes to help_text).
std::optional<RunConfig> parse_config(const std::vector<std::string>& args, std::string* help_text = nullptr,
                                      bool* sweep = nullptr);

void validate(const RunConfig& config);

std::string to_json(const RunConfig& config);
RunConfig from_json(const std::string& text, RunConfig base = {});

aggregate::FlConfig fl_config(const RunConfig& config);

struct RunSummary {
    std::vector<metrics::RoundRecord> rounds;
    std::vector<double> losses;
    std::vector<double> baseline;
    std::optional<double> ade;
    std::optional<double> fde;
    std::optional<std::size_t> stopping_round;
    std::string diagnostic;
};

// Runs the configured variant and writes rounds.csv, losses.csv,
// metrics.json, weights.bin, manifest.json and config.json under out.
RunSummary run(const RunConfig& config);

// One run per (quorum fraction, quota) cell, each in its own subdirectory.
std::vector<std::string> sweep(const RunConfig& base, const std::vector<double>& fractions = {0.2, 0.6},
                               const std::vector<std::size_t>& quotas = {20, 60});

std::string cell_name(double quorum_fraction, std::size_t quota);

// Artifact readers.
std::vector<metrics::RoundRecord> read_rounds_csv(const std::string& path);

struct LossRow {
    std::size_t iteration = 0;
    std::optional<double> loss;
    std::optional<double> baseline;
    friend bool operator==(const LossRow&, const LossRow&) = default;
};
std::vector<LossRow> read_losses_csv(const std::string& path);

void write_rounds_csv(const std::string& path, const std::vector<metrics::RoundRecord>& rounds);
void write_losses_csv(const std::string& path, const std::vector<LossRow>& rows);

}  // namespace flowfl::cli
