#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowfl/cli.hpp"
#include "flowfl/learner.hpp"

namespace {

int fail(const char* kind, const std::string& message, int code) {
    nlohmann::json j;
    j["error"] = {{"kind", kind}, {"message", message}};
    std::cerr << j.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace flowfl;
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        std::string help;
        bool do_sweep = false;
        const auto config = cli::parse_config(args, &help, &do_sweep);
        if (!config) {
            std::cout << help;
            return 0;
        }
        if (do_sweep) {
            for (const auto& dir : cli::sweep(*config)) std::cout << dir << '\n';
            return 0;
        }
        const auto s = cli::run(*config);
        std::printf("%s: %zu rounds", to_string(config->variant).c_str(), s.rounds.size());
        if (!s.losses.empty()) std::printf(", final loss %.4f", s.losses.back());
        if (s.ade) std::printf(", ADE %.2f m, FDE %.2f m", *s.ade, *s.fde);
        if (s.stopping_round) std::printf(", stopping round %zu", *s.stopping_round);
        std::printf("\n");
        if (!s.diagnostic.empty()) std::fprintf(stderr, "note: %s\n", s.diagnostic.c_str());
        return 0;
    } catch (const ConfigError& e) {
        return fail("config", e.what(), 2);
    } catch (const DataError& e) {
        return fail("data", e.what(), 3);
    } catch (const ProtocolError& e) {
        return fail("protocol", e.what(), 4);
    } catch (const learner::DivergenceError& e) {
        return fail("divergence", e.what(), 5);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 1);
    }
}
