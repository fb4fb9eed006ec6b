#include "flowfl/learner.hpp"
#include "model_impl.hpp"

namespace flowfl::learner::detail {

namespace {

// y = W x + b on the flattened history (x0, y0, x1, y1, ...). Used as a
// closed-form oracle for the training and aggregation paths.
class LinearModel final : public Model {
public:
    explicit LinearModel(const ArchDescriptor& arch)
        : arch_(arch), in_(2 * arch.history), out_(2 * arch.horizon) {}

    const ArchDescriptor& arch() const override { return arch_; }
    std::size_t dropout_width() const override { return 0; }

    Trajectory forward(std::span<const double> w, const Trajectory& input,
                       std::span<const double>) const override {
        check(w, input);
        const auto x = flatten(input);
        Trajectory out(arch_.horizon);
        for (std::size_t r = 0; r < out_; ++r) {
            double acc = w[out_ * in_ + r];
            const double* row = w.data() + r * in_;
            for (std::size_t c = 0; c < in_; ++c) acc += row[c] * x[c];
            if (r % 2 == 0)
                out[r / 2].x = acc;
            else
                out[r / 2].y = acc;
        }
        return out;
    }

    double loss_and_gradient(std::span<const double> w, const TrainingPair& pair, std::span<const double>,
                             std::span<double> grad) const override {
        check(w, pair.input);
        if (pair.target.size() != arch_.horizon) throw ShapeError("target length does not match model horizon");
        if (grad.size() != w.size()) throw ShapeError("gradient buffer has wrong size");
        const Trajectory y = forward(w, pair.input, {});
        const auto x = flatten(pair.input);
        double loss = 0.0;
        const double scale = 2.0 / static_cast<double>(out_);
        for (std::size_t r = 0; r < out_; ++r) {
            const double target = r % 2 == 0 ? pair.target[r / 2].x : pair.target[r / 2].y;
            const double pred = r % 2 == 0 ? y[r / 2].x : y[r / 2].y;
            const double d = pred - target;
            loss += d * d;
            const double dy = scale * d;
            double* grow = grad.data() + r * in_;
            for (std::size_t c = 0; c < in_; ++c) grow[c] += dy * x[c];
            grad[out_ * in_ + r] += dy;
        }
        return loss / static_cast<double>(out_);
    }

private:
    void check(std::span<const double> w, const Trajectory& input) const {
        if (w.size() != out_ * in_ + out_) throw ShapeError("weight vector does not match architecture");
        if (input.size() != arch_.history) throw ShapeError("input length does not match model history");
    }

    static std::vector<double> flatten(const Trajectory& t) {
        std::vector<double> x;
        x.reserve(2 * t.size());
        for (const auto& p : t) {
            x.push_back(p.x);
            x.push_back(p.y);
        }
        return x;
    }

    ArchDescriptor arch_;
    std::size_t in_, out_;
};

}  // namespace

std::unique_ptr<Model> make_linear(const ArchDescriptor& arch) { return std::make_unique<LinearModel>(arch); }

}  // namespace flowfl::learner::detail
