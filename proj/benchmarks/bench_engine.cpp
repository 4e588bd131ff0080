#include <benchmark/benchmark.h>

#include "sbg/canon.hpp"
#include "sbg/dsl.hpp"
#include "sbg/match.hpp"
#include "sbg/rewrite.hpp"

namespace {

// A meeting-room world with `rooms` rooms of two devices each.
sbg::dsl::Program make_world(int rooms) {
    std::string src =
        "ctrl Floor = 0;\n"
        "ctrl MeetingRoom = 0;\n"
        "ctrl Users = 0;\n"
        "atomic ctrl Node = 1;\n"
        "react shutdown_nodes = /x (MeetingRoom.(Users.() || Node{x} || rest))"
        " --> MeetingRoom.(rest);\n";
    std::string world = "Floor.(";
    for (int i = 0; i < rooms; ++i) {
        if (i) world += " | ";
        world += "/a /b (MeetingRoom.(Users.() | Node{a} | Node{b}))";
    }
    world += ")";
    src += "big world = " + world + ";\n";
    src += "begin brs\n  init world;\n  rules = [{shutdown_nodes}];\nend\n";
    return sbg::dsl::parse_program(src);
}

void BM_FindOccurrences(benchmark::State& state) {
    auto prog = make_world(static_cast<int>(state.range(0)));
    const sbg::Bigraph& agent = prog.find_bigraph("world")->value;
    const sbg::Bigraph& redex = prog.find_rule("shutdown_nodes")->rule.redex;
    for (auto _ : state) {
        auto occs = sbg::find_occurrences(agent, redex);
        benchmark::DoNotOptimize(occs);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FindOccurrences)->RangeMultiplier(2)->Range(1, 32)->Complexity();

void BM_RunToQuiescence(benchmark::State& state) {
    auto prog = make_world(static_cast<int>(state.range(0)));
    auto spec = prog.to_brs_spec();
    for (auto _ : state) {
        auto tr = sbg::run(spec, 10000);
        benchmark::DoNotOptimize(tr);
    }
}
BENCHMARK(BM_RunToQuiescence)->RangeMultiplier(2)->Range(1, 16);

void BM_CanonicalHash(benchmark::State& state) {
    auto prog = make_world(static_cast<int>(state.range(0)));
    const sbg::Bigraph& world = prog.find_bigraph("world")->value;
    for (auto _ : state) {
        auto h = sbg::canonical_hash(world);
        benchmark::DoNotOptimize(h);
    }
}
BENCHMARK(BM_CanonicalHash)->RangeMultiplier(2)->Range(1, 32);

} // namespace

BENCHMARK_MAIN();
