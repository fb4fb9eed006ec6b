#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "flowfl/learner.hpp"
#include "flowfl/rng.hpp"

namespace flowfl::testing {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Plain-loop LSTM forward pass written from the textbook recurrence, used to
// cross-check the library's matrix implementation. Parameter layout:
// Wx (4H x 2), Wh (4H x H), b (4H), Wd (O x H), bd (O); gates i, f, g, o.
inline Trajectory reference_lstm(const learner::ArchDescriptor& a, std::span<const double> w, const Trajectory& in,
                                 std::span<const double> mask = {}) {
    const std::size_t H = a.hidden, O = a.output_dim();
    const double* Wx = w.data();
    const double* Wh = Wx + 4 * H * 2;
    const double* b = Wh + 4 * H * H;
    const double* Wd = b + 4 * H;
    const double* bd = Wd + O * H;
    std::vector<double> h(H, 0.0), c(H, 0.0), z(4 * H);
    for (const auto& p : in) {
        for (std::size_t r = 0; r < 4 * H; ++r) {
            double acc = b[r] + Wx[r * 2] * p.x + Wx[r * 2 + 1] * p.y;
            for (std::size_t k = 0; k < H; ++k) acc += Wh[r * H + k] * h[k];
            z[r] = acc;
        }
        for (std::size_t k = 0; k < H; ++k) {
            const double i = sigmoid(z[k]), f = sigmoid(z[H + k]), g = std::tanh(z[2 * H + k]),
                         o = sigmoid(z[3 * H + k]);
            c[k] = f * c[k] + i * g;
            h[k] = o * std::tanh(c[k]);
        }
    }
    if (!mask.empty())
        for (std::size_t k = 0; k < H; ++k) h[k] *= mask[k];
    Trajectory out(a.horizon);
    for (std::size_t r = 0; r < O; ++r) {
        double acc = bd[r];
        for (std::size_t k = 0; k < H; ++k) acc += Wd[r * H + k] * h[k];
        (r % 2 == 0 ? out[r / 2].x : out[r / 2].y) = acc;
    }
    return out;
}

inline learner::TrainingPair random_pair(const learner::ArchDescriptor& a, Rng& rng, double scale = 1.0) {
    learner::TrainingPair p;
    for (std::size_t k = 0; k < a.history; ++k) p.input.push_back({scale * (2 * uniform01(rng) - 1), scale * (2 * uniform01(rng) - 1)});
    for (std::size_t k = 0; k < a.horizon; ++k) p.target.push_back({scale * (2 * uniform01(rng) - 1), scale * (2 * uniform01(rng) - 1)});
    return p;
}

struct GradCheck {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t worst_index = 0;
};

// Central differences on every parameter of the single-pair loss.
inline GradCheck finite_difference_check(const learner::Model& model, std::span<const double> w0,
                                         const learner::TrainingPair& pair, std::span<const double> mask,
                                         double step = 1e-5) {
    std::vector<double> w(w0.begin(), w0.end());
    std::vector<double> grad(w.size(), 0.0), scratch(w.size());
    model.loss_and_gradient(w, pair, mask, grad);
    GradCheck out;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double orig = w[k];
        w[k] = orig + step;
        const double up = model.loss_and_gradient(w, pair, mask, scratch);
        w[k] = orig - step;
        const double down = model.loss_and_gradient(w, pair, mask, scratch);
        w[k] = orig;
        const double numeric = (up - down) / (2 * step);
        // Relative error with a floor so that near-zero gradients compare absolutely.
        const double denom = std::max({std::abs(numeric), std::abs(grad[k]), 1e-6});
        const double rel = std::abs(numeric - grad[k]) / denom;
        if (rel > out.max_rel_error) {
            out.max_rel_error = rel;
            out.worst_index = k;
        }
        ++out.checked;
    }
    return out;
}

}  // namespace flowfl::testing
