#include <doctest.h>

#include "sbg/dsl.hpp"
#include "sbg/match.hpp"
#include "testutil.hpp"

using namespace sbg;

namespace {

dsl::Program listing1() {
    return dsl::parse_program(testutil::slurp(testutil::fixture("listing1.big")));
}

std::vector<std::string> encode_all(const std::vector<Occurrence>& occs) {
    std::vector<std::string> out;
    for (const auto& o : occs) out.push_back(testutil::encode_occurrence(o));
    return out;
}

} // namespace

TEST_SUITE("match") {

TEST_CASE("two devices give exactly two occurrences") {
    dsl::Program p = listing1();
    const Bigraph& agent = p.find_bigraph("room")->value;
    const Bigraph& redex = p.find_rule("shutdown_nodes")->rule.redex;
    auto occs = find_occurrences(agent, redex);
    REQUIRE(occs.size() == 2);
    // the unmatched Node falls into `rest`
    for (const auto& o : occs) {
        REQUIRE(o.site_fill.size() == 1);
        CHECK(o.site_fill.at(0).size() == 1);
    }
    CHECK(occs[0].site_fill.at(0) != occs[1].site_fill.at(0));
    CHECK(encode_all(occs) == encode_all(oracle_occurrences(agent, redex)));
}

TEST_CASE("a ground redex embeds identically once") {
    dsl::Program p = dsl::parse_program(
        "ctrl A = 0; ctrl B = 0; ctrl C = 0;\n"
        "big agent = A.(B | C);\n"
        "react self = A.(B | C) --> A.(B | C);\n");
    const Bigraph& agent = p.find_bigraph("agent")->value;
    auto occs = find_occurrences(agent, p.find_rule("self")->rule.redex);
    REQUIRE(occs.size() == 1);
    CHECK(occs[0].node_map.size() == agent.nodes.size());
    std::set<NodeId> image;
    for (const auto& [u, v] : occs[0].node_map) {
        (void)u;
        image.insert(v);
    }
    CHECK(image.size() == agent.nodes.size()); // bijective
}

TEST_CASE("exactness: an empty nest does not match a full one") {
    dsl::Program p = dsl::parse_program(
        "ctrl MeetingRoom = 0; ctrl Users = 0; atomic ctrl Person = 0; atomic ctrl Node = 1;\n"
        "big agent = /x (MeetingRoom.(Users.(Person) | Node{x}));\n"
        "react shutdown = /x (MeetingRoom.(Users.() || Node{x} || rest)) --> MeetingRoom.(rest);\n");
    const Bigraph& agent = p.find_bigraph("agent")->value;
    const Bigraph& redex = p.find_rule("shutdown")->rule.redex;
    CHECK(find_occurrences(agent, redex).empty());
    CHECK(oracle_occurrences(agent, redex).empty());
}

TEST_CASE("regions may land under one shared parent or two distinct ones") {
    dsl::Program p = dsl::parse_program("ctrl K = 0; ctrl A = 0; ctrl B = 0;\n"
                                        "big together = K.(A | B);\n"
                                        "big apart = K.(A) || K.(B);\n"
                                        "react r = A || B --> A || B;\n");
    const Bigraph& redex = p.find_rule("r")->rule.redex;
    REQUIRE(redex.iface.roots == 2);
    CHECK(count_occurrences(p.find_bigraph("together")->value, redex) == 1);
    CHECK(count_occurrences(p.find_bigraph("apart")->value, redex) == 1);
    CHECK(encode_all(find_occurrences(p.find_bigraph("apart")->value, redex)) ==
          encode_all(oracle_occurrences(p.find_bigraph("apart")->value, redex)));
}

TEST_CASE("a region cannot land inside another region's parameter") {
    dsl::Program p = dsl::parse_program("ctrl A = 0; ctrl B = 0;\n"
                                        "big agent = A.(B);\n"
                                        "react r = A.(s) || B --> A.(s) || B;\n");
    const Bigraph& agent = p.find_bigraph("agent")->value;
    const Bigraph& redex = p.find_rule("r")->rule.redex;
    CHECK(find_occurrences(agent, redex).empty());
    CHECK(oracle_occurrences(agent, redex).empty());
}

TEST_CASE("solidity violations are reported") {
    Signature sig;
    sig["A"] = {"A", 0, false};

    SUBCASE("empty region") {
        Bigraph redex = make_empty(sig, 1);
        try {
            require_solid(redex);
            FAIL("expected RedexNotSolid");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::redex_not_solid);
            CHECK(std::string(e.what()).find("no node") != std::string::npos);
        }
    }
    SUBCASE("site at a root") {
        Bigraph redex = make_node_bigraph(sig, "A");
        redex.iface.roots = 2;
        redex.iface.sites = 1;
        redex.site_parent[0] = Place::at_root(1);
        // region 1 would also be empty; put the site first in the message
        redex.node_parent[0] = Place::at_root(0);
        try {
            require_solid(redex);
            FAIL("expected RedexNotSolid");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::redex_not_solid);
        }
    }
    SUBCASE("two sites sharing a parent") {
        Bigraph redex = make_node_bigraph(sig, "A");
        redex.iface.sites = 2;
        redex.site_parent[0] = Place::at_node(0);
        redex.site_parent[1] = Place::at_node(0);
        try {
            require_solid(redex);
            FAIL("expected RedexNotSolid");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::redex_not_solid);
            CHECK(std::string(e.what()).find("share a parent") != std::string::npos);
        }
    }
}

TEST_CASE("oracle rejects agents above ten nodes") {
    Signature sig;
    sig["A"] = {"A", 0, false};
    Bigraph agent = make_empty(sig, 1);
    for (int i = 0; i < 11; ++i) {
        Node n;
        n.id = agent.next_node_id++;
        n.control = "A";
        agent.node_parent[n.id] = Place::at_root(0);
        agent.nodes[n.id] = n;
    }
    Bigraph redex = make_node_bigraph(sig, "A");
    try {
        oracle_occurrences(agent, redex);
        FAIL("expected SizeLimit");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::size_limit);
    }
}

TEST_CASE("empty agent has no occurrences") {
    Signature sig;
    sig["A"] = {"A", 0, false};
    Bigraph agent = make_empty(sig, 1);
    Bigraph redex = make_node_bigraph(sig, "A");
    CHECK(find_occurrences(agent, redex).empty());
    CHECK(oracle_occurrences(agent, redex).empty());
    CHECK(count_occurrences(agent, redex) == 0);
}

TEST_CASE("count matches the listing example") {
    dsl::Program p = listing1();
    CHECK(count_occurrences(p.find_bigraph("room")->value,
                            p.find_rule("shutdown_nodes")->rule.redex) == 2);
}

TEST_CASE("property: matcher agrees with the oracle") {
    testutil::Rng rng(101);
    int nontrivial = 0;
    for (int i = 0; i < 200; ++i) {
        Signature sig = testutil::rand_signature(rng);
        Bigraph agent = testutil::rand_ground(rng, sig, 10);
        // half the redexes are carved from the agent, half are independent
        Bigraph redex = i % 2 == 0 ? testutil::pattern_from(rng, agent)
                                   : testutil::rand_solid_redex(rng, sig, 5);
        auto fast = find_occurrences(agent, redex);
        auto slow = oracle_occurrences(agent, redex);
        CHECK_MESSAGE(encode_all(fast) == encode_all(slow), "iteration ", i);
        if (!fast.empty()) ++nontrivial;
    }
    CHECK(nontrivial > 50); // the corpus must actually exercise matching
}

TEST_CASE("property: count is invariant under agent renumbering") {
    testutil::Rng rng(103);
    for (int i = 0; i < 60; ++i) {
        Signature sig = testutil::rand_signature(rng);
        Bigraph agent = testutil::rand_ground(rng, sig, 8);
        Bigraph redex = testutil::rand_solid_redex(rng, sig, 4);
        CHECK(count_occurrences(agent, redex) ==
              count_occurrences(renumber(agent, 500), redex));
    }
}

TEST_CASE("property: unrelated root-level subtrees never change the count") {
    testutil::Rng rng(107);
    for (int i = 0; i < 60; ++i) {
        Signature sig = testutil::rand_signature(rng);
        Bigraph agent = testutil::rand_ground(rng, sig, 7);
        Bigraph redex = testutil::rand_solid_redex(rng, sig, 4);
        std::size_t before = count_occurrences(agent, redex);

        Signature wider = sig;
        wider["Zz"] = {"Zz", 0, false};
        Bigraph extended = agent;
        extended.signature = wider;
        Node extra;
        extra.id = extended.next_node_id++;
        extra.control = "Zz";
        extended.node_parent[extra.id] = Place::at_root(0);
        extended.nodes[extra.id] = extra;
        Bigraph redex2 = redex;
        redex2.signature = wider;
        CHECK(count_occurrences(extended, redex2) == before);
    }
}

TEST_CASE("property: every reported occurrence re-validates from definitions") {
    testutil::Rng rng(109);
    for (int i = 0; i < 80; ++i) {
        Signature sig = testutil::rand_signature(rng);
        Bigraph agent = testutil::rand_ground(rng, sig, 9);
        Bigraph redex = testutil::rand_solid_redex(rng, sig, 4);
        for (const auto& occ : find_occurrences(agent, redex)) {
            auto derived = derive_occurrence(agent, redex, occ.node_map);
            REQUIRE(derived.has_value());
            CHECK(testutil::encode_occurrence(*derived) == testutil::encode_occurrence(occ));
        }
    }
}

} // TEST_SUITE
