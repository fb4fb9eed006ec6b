#include "flowfl/aggregate.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <stdexcept>

namespace flowfl::aggregate {

learner::ModelWeights fedavg(std::span<const WeightContribution> contributions) {
    if (contributions.empty()) throw std::invalid_argument("fedavg of an empty contribution list");
    std::vector<const WeightContribution*> order;
    order.reserve(contributions.size());
    std::size_t total = 0;
    for (const auto& c : contributions) {
        if (c.weights.arch != contributions.front().weights.arch)
            throw std::invalid_argument("fedavg over mismatched architectures");
        if (c.weights.values.size() != c.weights.arch.param_count())
            throw std::invalid_argument("contribution weights do not match their architecture");
        total += c.n_k;
        order.push_back(&c);
    }
    if (total == 0) throw std::invalid_argument("fedavg with zero total samples");
    std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        return a->robot != b->robot ? a->robot < b->robot : a->round < b->round;
    });

    learner::ModelWeights out = learner::zero_weights(contributions.front().weights.arch);
    for (const auto* c : order) {
        const double share = static_cast<double>(c->n_k) / static_cast<double>(total);
        for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += share * c->weights.values[k];
    }
    return out;
}

namespace {

constexpr std::uint8_t kVersion = 1;

template <typename T>
void put(Bytes& out, T v) {
    for (std::size_t k = 0; k < sizeof(T); ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

template <typename T>
T get(std::span<const std::uint8_t> in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw std::invalid_argument("truncated contribution payload");
    T v = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) v |= static_cast<T>(in[pos + k]) << (8 * k);
    pos += sizeof(T);
    return v;
}

}  // namespace

Bytes encode_contribution(const WeightContribution& c) {
    Bytes out;
    out.reserve(37 + 8 * c.weights.values.size());
    for (char ch : {'F', 'F', 'L', 'C'}) out.push_back(static_cast<std::uint8_t>(ch));
    out.push_back(kVersion);
    put<std::uint64_t>(out, c.weights.arch.hash());
    put<std::uint32_t>(out, c.robot);
    put<std::uint64_t>(out, c.round);
    put<std::uint64_t>(out, c.n_k);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.weights.values.size()));
    for (double v : c.weights.values) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

WeightContribution decode_contribution(std::span<const std::uint8_t> bytes, const learner::ArchDescriptor& arch) {
    if (bytes.size() < 5 || bytes[0] != 'F' || bytes[1] != 'F' || bytes[2] != 'L' || bytes[3] != 'C')
        throw std::invalid_argument("not a contribution payload");
    if (bytes[4] != kVersion) throw std::invalid_argument("unsupported contribution payload version");
    std::size_t pos = 5;
    if (get<std::uint64_t>(bytes, pos) != arch.hash()) throw std::invalid_argument("contribution architecture mismatch");
    WeightContribution c;
    c.robot = get<std::uint32_t>(bytes, pos);
    c.round = get<std::uint64_t>(bytes, pos);
    c.n_k = static_cast<std::size_t>(get<std::uint64_t>(bytes, pos));
    const auto count = get<std::uint32_t>(bytes, pos);
    if (count != arch.param_count() || bytes.size() != pos + 8 * std::size_t{count})
        throw std::invalid_argument("contribution payload has wrong length");
    c.weights.arch = arch;
    c.weights.values.resize(count);
    for (auto& v : c.weights.values) v = std::bit_cast<double>(get<std::uint64_t>(bytes, pos));
    return c;
}

std::string weights_prefix(std::uint64_t round) { return "weights/" + std::to_string(round) + "/"; }
std::string weights_key(std::uint64_t round, RobotId robot) { return weights_prefix(round) + std::to_string(robot); }
std::string ready_prefix(std::uint64_t round) { return "ready/" + std::to_string(round) + "/"; }
std::string ready_key(std::uint64_t round, RobotId robot) { return ready_prefix(round) + std::to_string(robot); }

std::optional<std::uint64_t> round_of_key(const std::string& key) {
    const auto slash = key.find('/');
    if (slash == std::string::npos) return std::nullopt;
    const auto end = key.find('/', slash + 1);
    const char* first = key.data() + slash + 1;
    const char* last = end == std::string::npos ? key.data() + key.size() : key.data() + end;
    std::uint64_t r = 0;
    const auto res = std::from_chars(first, last, r);
    if (res.ec != std::errc{} || res.ptr != last || first == last) return std::nullopt;
    return r;
}

}  // namespace flowfl::aggregate
