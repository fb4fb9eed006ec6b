#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "flowfl/cli.hpp"

using namespace flowfl;
using namespace flowfl::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("flowfl_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

RunConfig small_run(const fs::path& out) {
    RunConfig c;
    c.synthetic = "straight_bounce";
    c.robots = 5;
    c.duration = 4000;
    c.quota = 5;
    c.model = "linear";
    c.optimizer = "sgd";
    c.learning_rate = 1e-3;
    c.dropout = 0.0;
    c.threads = 1;
    c.out = out.string();
    return c;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("defaults") {
    const auto c = parse_config({"--synthetic", "straight_bounce"});
    REQUIRE(c);
    CHECK(c->variant == VariantKind::flow_fl);
    CHECK(c->robots == 15);
    CHECK(c->quorum_fraction == doctest::Approx(0.2));
    CHECK(c->quota == 20);
    CHECK(c->local_epochs == 1);
    CHECK(c->loss_probability == 0.0);
    CHECK(c->model == "lstm");
    CHECK(c->optimizer == "rmsprop");
    CHECK(c->minibatch == 32);
    CHECK(c->dropout == doctest::Approx(0.2));
    CHECK(c->learning_rate == doctest::Approx(1e-3));
}

TEST_CASE("out-of-range values are configuration errors") {
    CHECK_THROWS_AS(parse_config({"--synthetic", "circle", "--quorum-fraction", "1.5"}), ConfigError);
    CHECK_THROWS_AS(parse_config({"--synthetic", "circle", "--quorum-fraction", "0"}), ConfigError);
    CHECK_THROWS_AS(parse_config({"--synthetic", "circle", "--loss-probability", "2"}), ConfigError);
    CHECK_THROWS_AS(parse_config({"--synthetic", "circle", "--model", "gru"}), ConfigError);
    CHECK_THROWS_AS(parse_config({"--synthetic", "flocking"}), ConfigError);
}

TEST_CASE("unknown flags are rejected") {
    CHECK_THROWS_AS(parse_config({"--synthetic", "circle", "--warp-speed", "9"}), ConfigError);
}

TEST_CASE("a dataset is required") {
    CHECK_THROWS_AS(parse_config({}), ConfigError);
    CHECK_THROWS_AS(parse_config({"--trajectory-file", "t.txt"}), ConfigError);
    CHECK_THROWS_AS(parse_config({"--trajectory-file", "t.txt", "--synthetic", "circle"}), ConfigError);
}

TEST_CASE("centralized runs need no communication graph") {
    const auto c = parse_config({"--variant", "centralized", "--trajectory-file", "t.txt"});
    REQUIRE(c);
    CHECK(c->variant == VariantKind::centralized);
}

TEST_CASE("a missing dataset file is a data error at run time") {
    const auto dir = scratch("missing");
    RunConfig c = small_run(dir / "out");
    c.synthetic.reset();
    c.variant = VariantKind::centralized;
    c.trajectory_file = (dir / "absent.txt").string();
    CHECK_THROWS_AS(run(c), DataError);
    fs::remove_all(dir);
}

TEST_CASE("flags override the config file") {
    const auto dir = scratch("precedence");
    {
        std::ofstream f(dir / "c.json");
        f << R"({"quota": 60, "robots": 7, "synthetic": "circle"})";
    }
    const auto c = parse_config({"--config", (dir / "c.json").string(), "--quota", "20"});
    REQUIRE(c);
    CHECK(c->quota == 20);
    CHECK(c->robots == 7);
    CHECK(c->synthetic == std::optional<std::string>("circle"));
    fs::remove_all(dir);
}

TEST_CASE("config JSON round-trips and rejects unknown keys") {
    RunConfig c;
    c.synthetic = "waypoint";
    c.quota = 33;
    c.epochs = 4;
    c.loss_probability = 0.25;
    const auto back = from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK(back.epochs == std::optional<std::size_t>(4));
    CHECK_THROWS_AS(from_json(R"({"quorum": 0.2})"), ConfigError);
    CHECK_THROWS_AS(from_json("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(from_json(R"({"quota": "many"})"), ConfigError);
}

TEST_CASE("help returns no configuration") {
    std::string help;
    CHECK_FALSE(parse_config({"--help"}, &help));
    CHECK(help.find("--quorum-fraction") != std::string::npos);
}

TEST_CASE("the thread cap comes from the environment") {
    RunConfig c = small_run("x");
    c.threads = 16;
    // ctest sets FLOWFL_THREADS=2 for this suite.
    if (std::getenv("FLOWFL_THREADS")) CHECK(fl_config(c).threads <= 2);
}

TEST_CASE("rounds and losses CSV round-trip") {
    const auto dir = scratch("csv");
    metrics::RoundRecord a;
    a.round = 0;
    a.quorum_tick = 120;
    a.start_tick = 131;
    a.end_tick = 400;
    a.barrier_wait_ticks = 11;
    a.learners = {{0, 16, 4}, {3, 17, 5}};
    a.federated_validation_loss = 0.123456789012345;
    metrics::RoundRecord b = a;
    b.round = 1;
    b.complete = false;
    b.learners = {{2, 20, 0}};
    write_rounds_csv((dir / "rounds.csv").string(), {a, b});
    CHECK(read_rounds_csv((dir / "rounds.csv").string()) == std::vector<metrics::RoundRecord>{a, b});

    std::vector<LossRow> rows{{0, 0.5, 0.4}, {1, 0.25, std::nullopt}, {2, std::nullopt, 0.1}};
    write_losses_csv((dir / "losses.csv").string(), rows);
    CHECK(read_losses_csv((dir / "losses.csv").string()) == rows);

    std::ofstream(dir / "bad.csv") << "nope\n";
    CHECK_THROWS_AS(read_rounds_csv((dir / "bad.csv").string()), DataError);
    fs::remove_all(dir);
}

TEST_CASE("a run writes its artifacts and repeats byte for byte") {
    const auto dir = scratch("determinism");
    RunConfig c = small_run(dir / "a");
    c.emit_dataset = true;
    const auto s1 = run(c);
    c.out = (dir / "b").string();
    const auto s2 = run(c);
    CHECK_FALSE(s1.rounds.empty());
    CHECK(s1.losses == s2.losses);
    for (const char* f : {"rounds.csv", "losses.csv", "metrics.json", "weights.bin", "manifest.json", "config.json",
                          "trajectories.txt", "comm_graph.txt"})
        CHECK_MESSAGE(fs::exists(dir / "a" / f), f);
    for (const char* f : {"losses.csv", "weights.bin", "manifest.json", "rounds.csv"})
        CHECK_MESSAGE(slurp(dir / "a" / f) == slurp(dir / "b" / f), f);
    CHECK(read_rounds_csv((dir / "a" / "rounds.csv").string()) == s1.rounds);

    // The emitted files drive an equivalent file-based run.
    RunConfig f = c;
    f.synthetic.reset();
    f.trajectory_file = (dir / "a" / "trajectories.txt").string();
    f.comm_graph_file = (dir / "a" / "comm_graph.txt").string();
    f.out = (dir / "c").string();
    const auto s3 = run(f);
    CHECK(s3.losses == s1.losses);
    fs::remove_all(dir);
}

TEST_CASE("sweep runs the four grid cells") {
    const auto dir = scratch("sweep");
    RunConfig c = small_run(dir);
    c.duration = 2500;
    const auto cells = sweep(c);
    CHECK(cells.size() == 4);
    CHECK(cell_name(0.2, 20) == "qf0.2_quota20");
    for (double q : {0.2, 0.6})
        for (std::size_t quota : {20u, 60u}) {
            CHECK(fs::exists(dir / cell_name(q, quota) / "config.json"));
            CHECK(fs::exists(dir / cell_name(q, quota) / "rounds.csv"));
        }
    fs::remove_all(dir);
}

}  // TEST_SUITE
