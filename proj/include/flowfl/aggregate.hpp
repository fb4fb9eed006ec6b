#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowfl/learner.hpp"
#include "flowfl/types.hpp"

namespace flowfl::aggregate {

struct WeightContribution {
    RobotId robot = 0;
    std::uint64_t round = 0;
    learner::ModelWeights weights;
    std::size_t n_k = 0;

    friend bool operator==(const WeightContribution&, const WeightContribution&) = default;
};

// Sample-weighted element-wise mean, n_k / sum(n). Contributions are reduced
// in ascending robot id, so the result does not depend on list order.
// Throws std::invalid_argument on an empty list, zero total samples or
// mismatched architectures.
learner::ModelWeights fedavg(std::span<const WeightContribution> contributions);

// Tuple-space payload for one learner's update. Unlike weights.bin this keeps
// full binary64 precision so that aggregating over the network is exact.
//   "FFLC" | u8 version | u64 arch hash | u32 robot | u64 round | u64 n_k |
//   u32 count | count x f64, all little-endian.
Bytes encode_contribution(const WeightContribution& c);
WeightContribution decode_contribution(std::span<const std::uint8_t> bytes, const learner::ArchDescriptor& arch);

// Per-round tuple namespaces.
std::string weights_prefix(std::uint64_t round);
std::string weights_key(std::uint64_t round, RobotId robot);
std::string ready_prefix(std::uint64_t round);
std::string ready_key(std::uint64_t round, RobotId robot);

// Round number encoded in a "weights/<round>/<robot>" or "ready/<round>/..." key.
std::optional<std::uint64_t> round_of_key(const std::string& key);

}  // namespace flowfl::aggregate
