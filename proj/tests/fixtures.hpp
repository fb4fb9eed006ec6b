#pragma once

#include <functional>
#include <vector>

#include "flowfl/dataio.hpp"
#include "flowfl/rng.hpp"

namespace flowfl::testing {

// A straight noisy track in the observer frame.
inline std::vector<Point2> line_track(Rng& rng, double noise = 0.0) {
    const double vx = 0.01 * (2 * uniform01(rng) - 1), vy = 0.01 * (2 * uniform01(rng) - 1);
    std::vector<Point2> pts(dataio::kSampleLength);
    for (std::size_t t = 0; t < pts.size(); ++t)
        pts[t] = {vx * t + noise * (uniform01(rng) - 0.5), vy * t + noise * (uniform01(rng) - 0.5)};
    return pts;
}

// Every robot r finishes `count` recordings, the last one completing at
// done_at(r) and the earlier ones one tick apart before it.
inline std::vector<dataio::TrajectorySample> quota_stream(std::size_t robots, std::size_t count,
                                                          const std::function<Tick(RobotId)>& done_at,
                                                          std::uint64_t seed = 1) {
    Rng rng = make_stream(seed, "test/quota-stream");
    std::vector<dataio::TrajectorySample> out;
    for (RobotId r = 0; r < robots; ++r) {
        for (std::size_t k = 0; k < count; ++k) {
            const Tick available = done_at(r) - static_cast<Tick>(count - 1 - k);
            out.push_back({r, static_cast<RobotId>((r + 1 + k) % robots), available - static_cast<Tick>(dataio::kSampleLength),
                           line_track(rng)});
        }
    }
    return out;
}

}  // namespace flowfl::testing
