#include <Eigen/Dense>

#include "flowfl/learner.hpp"
#include "model_impl.hpp"

namespace flowfl::learner::detail {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const RowMat>;
using MatMap = Eigen::Map<RowMat>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& z) { return 1.0 / (1.0 + (-z).exp()); }

// Offsets of each parameter block in the flat vector, in canonical order:
// input weights (4H x 2), recurrent weights (4H x H), gate bias (4H),
// dense weights (O x H), dense bias (O). Gate rows are ordered i, f, g, o.
struct Layout {
    std::size_t H, O;
    std::size_t wx, wh, b, wd, bd, total;

    explicit Layout(const ArchDescriptor& a) : H(a.hidden), O(a.output_dim()) {
        wx = 0;
        wh = wx + 4 * H * 2;
        b = wh + 4 * H * H;
        wd = b + 4 * H;
        bd = wd + O * H;
        total = bd + O;
    }
};

struct Views {
    ConstMatMap Wx, Wh;
    ConstVecMap b;
    ConstMatMap Wd;
    ConstVecMap bd;

    Views(const Layout& L, std::span<const double> w)
        : Wx(w.data() + L.wx, 4 * L.H, 2), Wh(w.data() + L.wh, 4 * L.H, L.H), b(w.data() + L.b, 4 * L.H),
          Wd(w.data() + L.wd, L.O, L.H), bd(w.data() + L.bd, L.O) {}
};

// Activations kept for back-propagation; column t holds step t.
struct Tape {
    Eigen::MatrixXd x, i, f, g, o, c, tc, h;  // c and h have T+1 columns (column 0 = zero state)
    Eigen::VectorXd dense_in;
    Eigen::VectorXd y;
};

class LstmModel final : public Model {
public:
    explicit LstmModel(const ArchDescriptor& arch) : arch_(arch), layout_(arch) {}

    const ArchDescriptor& arch() const override { return arch_; }
    std::size_t dropout_width() const override { return arch_.hidden; }

    Trajectory forward(std::span<const double> w, const Trajectory& input,
                       std::span<const double> dropout_scale) const override {
        check(w, input, dropout_scale);
        Tape tape;
        run(w, input, dropout_scale, tape);
        return to_trajectory(tape.y);
    }

    double loss_and_gradient(std::span<const double> w, const TrainingPair& pair, std::span<const double> dropout_scale,
                             std::span<double> grad) const override {
        check(w, pair.input, dropout_scale);
        if (pair.target.size() != arch_.horizon) throw ShapeError("target length does not match model horizon");
        if (grad.size() != layout_.total) throw ShapeError("gradient buffer has wrong size");
        Tape tape;
        run(w, pair.input, dropout_scale, tape);

        const std::size_t H = layout_.H, O = layout_.O, T = arch_.history;
        Eigen::VectorXd diff(O);
        for (std::size_t k = 0; k < arch_.horizon; ++k) {
            diff[2 * k] = tape.y[2 * k] - pair.target[k].x;
            diff[2 * k + 1] = tape.y[2 * k + 1] - pair.target[k].y;
        }
        const double loss = diff.squaredNorm() / static_cast<double>(O);
        const Eigen::VectorXd dy = diff * (2.0 / static_cast<double>(O));

        const Views V(layout_, w);
        MatMap dWx(grad.data() + layout_.wx, 4 * H, 2);
        MatMap dWh(grad.data() + layout_.wh, 4 * H, H);
        VecMap db(grad.data() + layout_.b, 4 * H);
        MatMap dWd(grad.data() + layout_.wd, O, H);
        VecMap dbd(grad.data() + layout_.bd, O);

        dWd.noalias() += dy * tape.dense_in.transpose();
        dbd += dy;
        Eigen::VectorXd dh = V.Wd.transpose() * dy;
        if (!dropout_scale.empty()) dh.array() *= ConstVecMap(dropout_scale.data(), H).array();

        Eigen::VectorXd dc = Eigen::VectorXd::Zero(H);
        Eigen::VectorXd dz(4 * H);
        for (std::size_t s = T; s-- > 0;) {
            const auto i = tape.i.col(s).array();
            const auto f = tape.f.col(s).array();
            const auto g = tape.g.col(s).array();
            const auto o = tape.o.col(s).array();
            const auto tc = tape.tc.col(s).array();
            const auto c_prev = tape.c.col(s).array();

            dc.array() += dh.array() * o * (1.0 - tc.square());
            dz.segment(0, H).array() = dc.array() * g * i * (1.0 - i);
            dz.segment(H, H).array() = dc.array() * c_prev * f * (1.0 - f);
            dz.segment(2 * H, H).array() = dc.array() * i * (1.0 - g.square());
            dz.segment(3 * H, H).array() = dh.array() * tc * o * (1.0 - o);

            dWx.noalias() += dz * tape.x.col(s).transpose();
            dWh.noalias() += dz * tape.h.col(s).transpose();
            db += dz;
            dh.noalias() = V.Wh.transpose() * dz;
            dc.array() *= f;
        }
        return loss;
    }

private:
    void check(std::span<const double> w, const Trajectory& input, std::span<const double> dropout_scale) const {
        if (w.size() != layout_.total) throw ShapeError("weight vector does not match architecture");
        if (input.size() != arch_.history) throw ShapeError("input length does not match model history");
        if (!dropout_scale.empty() && dropout_scale.size() != arch_.hidden)
            throw ShapeError("dropout mask width does not match hidden size");
    }

    // Tape columns: x/i/f/g/o/tc index steps 0..T-1; c/h index states 0..T
    // where column s is the state *before* step s and column T the final one.
    void run(std::span<const double> w, const Trajectory& input, std::span<const double> dropout_scale,
             Tape& tape) const {
        const std::size_t H = layout_.H, T = arch_.history;
        const Views V(layout_, w);
        tape.x.resize(2, T);
        tape.i.resize(H, T);
        tape.f.resize(H, T);
        tape.g.resize(H, T);
        tape.o.resize(H, T);
        tape.tc.resize(H, T);
        tape.c.setZero(H, T + 1);
        tape.h.setZero(H, T + 1);
        Eigen::VectorXd z(4 * H);
        for (std::size_t s = 0; s < T; ++s) {
            tape.x(0, s) = input[s].x;
            tape.x(1, s) = input[s].y;
            z.noalias() = V.Wx * tape.x.col(s);
            z.noalias() += V.Wh * tape.h.col(s);
            z += V.b;
            tape.i.col(s) = sigmoid(z.segment(0, H).array()).matrix();
            tape.f.col(s) = sigmoid(z.segment(H, H).array()).matrix();
            tape.g.col(s) = z.segment(2 * H, H).array().tanh().matrix();
            tape.o.col(s) = sigmoid(z.segment(3 * H, H).array()).matrix();
            tape.c.col(s + 1) = (tape.f.col(s).array() * tape.c.col(s).array() +
                                 tape.i.col(s).array() * tape.g.col(s).array())
                                    .matrix();
            tape.tc.col(s) = tape.c.col(s + 1).array().tanh().matrix();
            tape.h.col(s + 1) = (tape.o.col(s).array() * tape.tc.col(s).array()).matrix();
        }
        tape.dense_in = tape.h.col(T);
        if (!dropout_scale.empty()) tape.dense_in.array() *= ConstVecMap(dropout_scale.data(), H).array();
        tape.y = V.Wd * tape.dense_in + V.bd;
    }

    Trajectory to_trajectory(const Eigen::VectorXd& y) const {
        Trajectory out(arch_.horizon);
        for (std::size_t k = 0; k < arch_.horizon; ++k) out[k] = {y[2 * k], y[2 * k + 1]};
        return out;
    }

    ArchDescriptor arch_;
    Layout layout_;
};

}  // namespace

std::unique_ptr<Model> make_lstm(const ArchDescriptor& arch) { return std::make_unique<LstmModel>(arch); }

std::size_t lstm_param_count(const ArchDescriptor& arch) { return Layout(arch).total; }

}  // namespace flowfl::learner::detail
