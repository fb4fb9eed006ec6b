#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "flowfl/learner.hpp"
#include "oracles.hpp"

using namespace flowfl;
using namespace flowfl::learner;

namespace {

Trajectory constant_traj(std::size_t n, double v) { return Trajectory(n, Point2{v, v}); }

std::vector<TrainingPair> straight_lines(std::size_t n, Rng& rng) {
    std::vector<TrainingPair> out;
    for (std::size_t k = 0; k < n; ++k) {
        const double vx = 0.02 * (2 * uniform01(rng) - 1), vy = 0.02 * (2 * uniform01(rng) - 1);
        std::vector<Point2> pts;
        for (int t = 0; t < 80; ++t) pts.push_back({vx * t, vy * t});
        auto p = make_pairs(pts, 32, 48, false);
        out.push_back(p[0]);
    }
    return out;
}

}  // namespace

TEST_SUITE("learner") {

TEST_CASE("default architecture sizes") {
    const auto a = ArchDescriptor::lstm();
    CHECK(a.output_dim() == 96);
    CHECK(a.param_count() == 4 * 16 * 2 + 4 * 16 * 16 + 4 * 16 + 96 * 16 + 96);
    CHECK(ArchDescriptor::linear().param_count() == 96 * 64 + 96);
    CHECK(a.hash() != ArchDescriptor::lstm(8).hash());
}

TEST_CASE("zero weights predict zero") {
    const auto a = ArchDescriptor::lstm();
    auto model = make_model(a);
    Rng rng = make_stream(1, "t");
    const auto p = testing::random_pair(a, rng);
    const auto out = model->forward(zero_weights(a).values, p.input);
    REQUIRE(out.size() == 48);
    for (const auto& q : out) {
        CHECK(q.x == 0.0);
        CHECK(q.y == 0.0);
    }
}

TEST_CASE("forward agrees with a plain-loop reference") {
    const auto a = ArchDescriptor::lstm(5, 7, 3);
    auto model = make_model(a);
    Rng rng = make_stream(2, "t");
    const auto w = init_weights(a, rng);
    const auto p = testing::random_pair(a, rng);
    const auto got = model->forward(w.values, p.input);
    const auto want = testing::reference_lstm(a, w.values, p.input);
    for (std::size_t k = 0; k < got.size(); ++k) {
        CHECK(got[k].x == doctest::Approx(want[k].x).epsilon(1e-12));
        CHECK(got[k].y == doctest::Approx(want[k].y).epsilon(1e-12));
    }
    std::vector<double> mask{0.0, 1.25, 1.25, 0.0, 1.25};
    const auto got_m = model->forward(w.values, p.input, mask);
    const auto want_m = testing::reference_lstm(a, w.values, p.input, mask);
    for (std::size_t k = 0; k < got_m.size(); ++k) CHECK(got_m[k].x == doctest::Approx(want_m[k].x).epsilon(1e-12));
}

TEST_CASE("forward is deterministic") {
    const auto a = ArchDescriptor::lstm();
    auto model = make_model(a);
    Rng r1 = make_stream(3, "init"), r2 = make_stream(3, "init");
    const auto w1 = init_weights(a, r1), w2 = init_weights(a, r2);
    CHECK(w1 == w2);
    Rng rp = make_stream(3, "pair");
    const auto p = testing::random_pair(a, rp);
    CHECK(model->forward(w1.values, p.input) == model->forward(w2.values, p.input));
}

TEST_CASE("initialization respects the fan-in bounds") {
    const auto a = ArchDescriptor::lstm();
    Rng rng = make_stream(4, "init");
    const auto w = init_weights(a, rng);
    const std::size_t gates = 4 * 16 * (2 + 16 + 1);
    for (std::size_t k = 0; k < w.values.size(); ++k) {
        const double bound = k < gates ? 1.0 / std::sqrt(18.0) : 1.0 / 4.0;
        CHECK(std::abs(w.values[k]) <= bound);
    }
}

TEST_CASE("wrong input length is a shape error") {
    const auto a = ArchDescriptor::lstm();
    auto model = make_model(a);
    const auto w = zero_weights(a);
    CHECK_THROWS_AS(model->forward(w.values, Trajectory(31)), ShapeError);
    CHECK_THROWS_AS(model->forward(std::vector<double>(5), Trajectory(32)), ShapeError);
}

TEST_CASE("mse arithmetic") {
    CHECK(mse_loss(constant_traj(4, 1.0), constant_traj(4, 1.0)) == 0.0);
    CHECK(mse_loss(constant_traj(4, 2.0), constant_traj(4, 1.0)) == 1.0);
    CHECK(mse_loss({{0, 0}}, {{1, 1}}) == 1.0);
    CHECK_THROWS_AS(mse_loss(constant_traj(3, 0), constant_traj(4, 0)), ShapeError);
}

TEST_CASE("LSTM gradients match central differences") {
    const auto a = ArchDescriptor::lstm(4, 4, 3);  // four unrolled steps
    auto model = make_model(a);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng = make_stream(seed, "gradcheck");
        auto w = init_weights(a, rng);
        for (double& v : w.values) v *= 3.0;  // leave the linear regime
        const auto p = testing::random_pair(a, rng);
        std::vector<double> mask(a.hidden);
        for (double& m : mask) m = uniform01(rng) < 0.2 ? 0.0 : 1.25;
        const auto r = testing::finite_difference_check(*model, w.values, p, seed % 2 ? mask : std::vector<double>{});
        CHECK(r.checked == a.param_count());
        CHECK(r.max_rel_error < 1e-4);
    }
}

TEST_CASE("linear gradients match central differences") {
    const auto a = ArchDescriptor::linear(3, 2);
    auto model = make_model(a);
    Rng rng = make_stream(9, "gradcheck");
    const auto w = init_weights(a, rng);
    const auto p = testing::random_pair(a, rng);
    CHECK(testing::finite_difference_check(*model, w.values, p, {}).max_rel_error < 1e-6);
}

TEST_CASE("one full-batch SGD step on the linear model matches the closed form") {
    const auto a = ArchDescriptor::linear(2, 1);
    auto model = make_model(a);
    Rng rng = make_stream(5, "t");
    auto w = init_weights(a, rng);
    std::vector<TrainingPair> batch;
    for (int k = 0; k < 6; ++k) batch.push_back(testing::random_pair(a, rng));

    // w' = w - lr * (1/n) sum (2/O) (W x + b - y) [x; 1]^T
    const std::size_t in = 4, out = 2;
    std::vector<double> expect = w.values;
    const double lr = 0.05;
    for (const auto& p : batch) {
        const double x[4] = {p.input[0].x, p.input[0].y, p.input[1].x, p.input[1].y};
        const double y[2] = {p.target[0].x, p.target[0].y};
        for (std::size_t r = 0; r < out; ++r) {
            double pred = w.values[out * in + r];
            for (std::size_t c = 0; c < in; ++c) pred += w.values[r * in + c] * x[c];
            const double g = 2.0 / out * (pred - y[r]) / batch.size();
            for (std::size_t c = 0; c < in; ++c) expect[r * in + c] -= lr * g * x[c];
            expect[out * in + r] -= lr * g;
        }
    }
    OptimizerState opt({OptimizerKind::sgd, lr, 0.9, 1e-7}, w.values.size());
    Rng shuffle = make_stream(5, "shuffle");
    const auto res = train_epoch(*model, w, batch, opt, shuffle, {batch.size(), 0.0});
    CHECK(res.steps == 1);
    for (std::size_t k = 0; k < expect.size(); ++k) CHECK(w.values[k] == doctest::Approx(expect[k]).epsilon(1e-12));
}

TEST_CASE("RMSProp leaves weights alone under zero gradients") {
    OptimizerState opt({}, 3);
    std::vector<double> w{1.0, -2.0, 3.0}, g(3, 0.0);
    opt.apply(w, g);
    CHECK(w == std::vector<double>{1.0, -2.0, 3.0});
}

TEST_CASE("RMSProp update rule") {
    OptimizerConfig c;
    c.learning_rate = 0.1;
    OptimizerState opt(c, 1);
    std::vector<double> w{1.0}, g{2.0};
    opt.apply(w, g);
    const double acc = 0.1 * 4.0;
    CHECK(opt.accumulators[0] == doctest::Approx(acc));
    CHECK(w[0] == doctest::Approx(1.0 - 0.1 * 2.0 / (std::sqrt(acc) + 1e-7)));
    CHECK(opt.accumulators[0] >= 0.0);
}

TEST_CASE("an epoch on straight lines lowers the loss") {
    const auto a = ArchDescriptor::lstm();
    auto model = make_model(a);
    Rng rng = make_stream(6, "data");
    const auto batch = straight_lines(64, rng);
    Rng init = make_stream(6, "init");
    auto w = init_weights(a, init);
    const double before = *validation_loss(*model, w, batch);
    OptimizerConfig oc;
    oc.learning_rate = 3e-3;
    OptimizerState opt(oc, w.values.size());
    Rng tr = make_stream(6, "train");
    for (int e = 0; e < 3; ++e) train_epoch(*model, w, batch, opt, tr, {});
    CHECK(*validation_loss(*model, w, batch) < before);
}

TEST_CASE("training is deterministic for a seed") {
    const auto a = ArchDescriptor::lstm();
    auto model = make_model(a);
    Rng rng = make_stream(7, "data");
    const auto batch = straight_lines(40, rng);
    auto run = [&] {
        Rng init = make_stream(7, "init");
        auto w = init_weights(a, init);
        OptimizerState opt({}, w.values.size());
        Rng tr = make_stream(7, "train");
        train_epoch(*model, w, batch, opt, tr, {});
        return w;
    };
    CHECK(run() == run());
}

TEST_CASE("training errors") {
    const auto a = ArchDescriptor::lstm();
    auto model = make_model(a);
    auto w = zero_weights(a);
    OptimizerState opt({}, w.values.size());
    Rng rng = make_stream(1, "t");
    CHECK_THROWS_AS(train_epoch(*model, w, {}, opt, rng, {}), std::invalid_argument);

    Rng d = make_stream(1, "d");
    auto batch = straight_lines(2, d);
    batch[0].target[0].x = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(train_epoch(*model, w, batch, opt, rng, {1, 0.0}), DivergenceError);
}

TEST_CASE("validation loss cases") {
    const auto a = ArchDescriptor::lstm();
    auto model = make_model(a);
    const auto w = zero_weights(a);
    CHECK_FALSE(validation_loss(*model, w, {}).has_value());
    TrainingPair unit{Trajectory(32), constant_traj(48, 1.0)};
    CHECK(*validation_loss(*model, w, std::vector<TrainingPair>{unit}) == 1.0);
    TrainingPair zero{Trajectory(32), constant_traj(48, 0.0)};
    CHECK(*validation_loss(*model, w, std::vector<TrainingPair>{zero}) == 0.0);
}

TEST_CASE("validation ignores the dropout generator") {
    const auto a = ArchDescriptor::lstm();
    auto model = make_model(a);
    Rng init = make_stream(8, "init");
    const auto w = init_weights(a, init);
    Rng d = make_stream(8, "d");
    const auto batch = straight_lines(5, d);
    const double v1 = *validation_loss(*model, w, batch);
    Rng burn = make_stream(99, "x");
    for (int k = 0; k < 10; ++k) burn();
    CHECK(*validation_loss(*model, w, batch) == v1);
}

TEST_CASE("pair extraction") {
    std::vector<Point2> pts(100);
    for (int k = 0; k < 100; ++k) pts[k] = {double(k), 0};
    const auto one = make_pairs(pts, 32, 48, false);
    REQUIRE(one.size() == 1);
    CHECK(one[0].input.front().x == 0);
    CHECK(one[0].target.front().x == 32);
    CHECK(one[0].target.back().x == 79);
    const auto all = make_pairs(pts, 32, 48, true);
    CHECK(all.size() == 21);
    CHECK(all.back().target.back().x == 99);
    CHECK(make_pairs(std::span(pts).first(79), 32, 48, false).empty());
}

TEST_CASE("weight blobs round-trip through f32") {
    const auto a = ArchDescriptor::lstm();
    Rng rng = make_stream(10, "init");
    auto w = init_weights(a, rng);
    for (double& v : w.values) v = static_cast<float>(v);
    const auto blob = serialize_weights(w);
    CHECK(blob.size() == 8 + 4 * a.param_count());
    const auto back = deserialize_weights(blob, a);
    CHECK(back == w);
    CHECK(serialize_weights(back) == blob);
    CHECK_THROWS_AS(deserialize_weights(blob, ArchDescriptor::lstm(8)), ShapeError);
    auto bad = blob;
    bad[0] ^= 1;
    CHECK_THROWS_AS(deserialize_weights(bad, a), ShapeError);

    const auto path = (std::filesystem::temp_directory_path() / "flowfl_weights_test.bin").string();
    write_weights_file(path, w);
    CHECK(read_weights_file(path, a) == w);
    std::filesystem::remove(path);
}

}  // TEST_SUITE
