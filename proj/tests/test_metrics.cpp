#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "flowfl/metrics.hpp"
#include "flowfl/rng.hpp"

using namespace flowfl;
using namespace flowfl::metrics;

namespace {

Trajectory constant(std::size_t n, Point2 p) { return Trajectory(n, p); }

// Per-point errors summed in the opposite order from the library.
double ade_oracle(const std::vector<Trajectory>& a, const std::vector<Trajectory>& b) {
    long double acc = 0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < b.front().size(); ++t)
        for (std::size_t i = b.size(); i-- > 0;) {
            const long double dx = a[i][t].x - b[i][t].x, dy = a[i][t].y - b[i][t].y;
            acc += std::sqrt(dx * dx + dy * dy);
            ++count;
        }
    return static_cast<double>(acc / count);
}

RoundRecord record(Tick start, Tick wait) {
    RoundRecord r;
    r.start_tick = start;
    r.quorum_tick = start - wait;
    r.barrier_wait_ticks = wait;
    return r;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("a constant offset gives its length as ADE and FDE") {
    std::vector<Trajectory> pred{constant(48, {0.3, 0.4})}, truth{constant(48, {0.0, 0.0})};
    CHECK(ade(pred, truth) == doctest::Approx(0.5));
    CHECK(fde(pred, truth) == doctest::Approx(0.5));
}

TEST_CASE("an error at the final step only") {
    std::vector<Trajectory> pred{constant(48, {0, 0})}, truth{constant(48, {0, 0})};
    pred[0].back() = {1.0, 0.0};
    CHECK(fde(pred, truth) == doctest::Approx(1.0));
    CHECK(ade(pred, truth) == doctest::Approx(1.0 / 48));
}

TEST_CASE("ADE matches a brute-force sum on random trajectories") {
    Rng rng = make_stream(3, "metrics");
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Trajectory> a(7, Trajectory(48)), b(7, Trajectory(48));
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t t = 0; t < 48; ++t) {
                a[i][t] = {n(rng), n(rng)};
                b[i][t] = {n(rng), n(rng)};
            }
        CHECK(ade(a, b) == doctest::Approx(ade_oracle(a, b)).epsilon(1e-12));
        double f = 0;
        for (std::size_t i = 0; i < a.size(); ++i) f += std::hypot(a[i][47].x - b[i][47].x, a[i][47].y - b[i][47].y);
        CHECK(fde(a, b) == doctest::Approx(f / 7).epsilon(1e-12));
    }
}

TEST_CASE("displacement errors reject bad input") {
    std::vector<Trajectory> none;
    std::vector<Trajectory> one{constant(48, {0, 0})}, two{constant(48, {0, 0}), constant(48, {0, 0})};
    std::vector<Trajectory> short_one{constant(47, {0, 0})};
    CHECK_THROWS_AS(ade(none, none), std::invalid_argument);
    CHECK_THROWS_AS(ade(one, two), std::invalid_argument);
    CHECK_THROWS_AS(fde(one, short_one), std::invalid_argument);
}

TEST_CASE("federated validation loss weights by sample count") {
    std::vector<LossShare> s{{0.2, 10}, {0.4, 30}};
    CHECK(federated_validation_loss(s) == doctest::Approx(0.35));
    std::vector<LossShare> zero{{0.2, 0}};
    CHECK_THROWS_AS(federated_validation_loss(zero), std::invalid_argument);
}

TEST_CASE("a flat curve stops as soon as two windows exist") {
    std::vector<double> c(6, 0.5);
    CHECK(stopping_round(c) == std::optional<std::size_t>(5));
    std::string why;
    std::vector<double> shorter(5, 0.5);
    CHECK_FALSE(stopping_round(shorter, {}, &why));
    CHECK_FALSE(why.empty());
}

TEST_CASE("a steadily falling curve never stops") {
    std::vector<double> c;
    for (int k = 0; k < 40; ++k) c.push_back(10.0 - 0.1 * k);
    std::string why;
    CHECK_FALSE(stopping_round(c, {}, &why));
    CHECK_FALSE(why.empty());
}

TEST_CASE("hand-computed stopping fixture") {
    // Window-mean changes from r = 5: -0.116, -0.078, -0.039, -0.02, -0.01,
    // -0.004, -0.002.
    const std::vector<double> c{1.0, 0.8, 0.6, 0.5, 0.45, 0.42, 0.41, 0.405, 0.4, 0.4, 0.4, 0.4};
    CHECK(stopping_round(c, {5, 3e-3}) == std::optional<std::size_t>(11));
    CHECK(stopping_round(c, {5, 5e-3}) == std::optional<std::size_t>(10));
    CHECK(stopping_round(c, {5, 0.05}) == std::optional<std::size_t>(7));
    CHECK_FALSE(stopping_round(c, {5, 1e-4}));
    CHECK_THROWS_AS(stopping_round(c, {0, 1e-4}), std::invalid_argument);
}

TEST_CASE("a looser threshold never stops later") {
    Rng rng = make_stream(9, "metrics");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> c;
        double v = 2.0;
        for (int k = 0; k < 60; ++k) c.push_back(v *= 0.8 + 0.15 * u(rng));
        std::size_t prev = c.size();
        for (double th : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
            const auto r = stopping_round(c, {5, th}).value_or(c.size());
            CHECK(r <= prev);
            prev = r;
        }
    }
}

TEST_CASE("timing report gaps and waits") {
    std::vector<RoundRecord> rs{record(100, 4), record(350, 10)};
    const auto rep = timing_report(rs);
    REQUIRE(rep.gap_ticks.size() == 1);
    CHECK(rep.gap_ticks[0] == 250);
    CHECK(rep.gap_seconds[0] == doctest::Approx(25.0));
    CHECK(rep.mean_barrier_wait == doctest::Approx(7.0));
    CHECK(rep.stdev_barrier_wait == doctest::Approx(std::sqrt(18.0)));
    CHECK_THROWS_AS(timing_report(std::span<const RoundRecord>(rs.data(), 1)), std::invalid_argument);
}

TEST_CASE("mean and sample deviation") {
    const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
    CHECK(mean(v) == doctest::Approx(5.0));
    CHECK(stdev(v) == doctest::Approx(std::sqrt(32.0 / 7)));
}

TEST_CASE("variant names") {
    for (auto v : {VariantKind::centralized, VariantKind::server_fl, VariantKind::flow_fl})
        CHECK(parse_variant(to_string(v)) == v);
    CHECK(parse_variant("flow-fl") == VariantKind::flow_fl);
    CHECK_THROWS_AS(parse_variant("gossip"), ConfigError);
}

}  // TEST_SUITE
