#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "graf/kg.hpp"

using namespace graf;

namespace {

std::string read(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("triplet block parsing") {
    auto b = parse_triplet_block("(court of appeal;shall operated in addition to;assets investigation commission)\nSTOP");
    REQUIRE(b.triplets.size() == 1);
    CHECK(b.triplets[0] == Triplet{"court of appeal", "shall operated in addition to", "assets investigation commission"});
    CHECK(b.saw_stop);

    b = parse_triplet_block("garbage line\nSTOP");
    CHECK(b.triplets.empty());
    CHECK(b.skipped == 1);

    b = parse_triplet_block("(a;r;b)\n(a;r;b)\nSTOP");
    CHECK(b.triplets.size() == 2);

    b = parse_triplet_block("(a;r;b)\nSTOP\n(c;r;d)");
    CHECK(b.triplets.size() == 1);

    b = parse_triplet_block("( a ; r ;b )\n(a;;b)\n(a;b)\n(a;b;c;d)\n");
    CHECK(b.triplets.size() == 1);
    CHECK(b.triplets[0].head == "a");
    CHECK(b.skipped == 3);
    CHECK_FALSE(b.saw_stop);
}

TEST_CASE("example block from the fixtures") {
    for (const char* name : {"example_triplets_en.txt", "example_triplets_ro.txt", "example_completion_en.txt"}) {
        CAPTURE(name);
        const auto b = parse_triplet_block(read(std::string(GRAF_FIXTURE_DIR) + "/" + name));
        CHECK(b.triplets.size() == 15);
        CHECK(b.saw_stop);
    }
}

TEST_CASE("build examples") {
    CHECK(build_graph({}).entity_count() == 0);
    CHECK(build_graph({}).edge_count() == 0);

    std::vector<Triplet> dup{{"a", "r", "b"}, {"A ", "r", " b"}};
    auto g = build_graph(dup);
    CHECK(g.entity_count() == 2);
    CHECK(g.edge_count() == 1);

    std::vector<Triplet> chain{{"a", "r", "b"}, {"b", "s", "c"}};
    g = build_graph(chain);
    CHECK(g.entity_count() == 3);
    CHECK(g.edge_count() == 2);
    const EntityId b = *g.find("B");
    std::set<std::pair<std::string, std::string>> nb;
    for (const auto& inc : g.incident(b)) nb.emplace(g.name(inc.other), g.edge(inc.edge).relation);
    CHECK(nb == std::set<std::pair<std::string, std::string>>{{"a", "r"}, {"c", "s"}});
}

TEST_CASE("self loops are listed once") {
    std::vector<Triplet> t{{"x", "refers to", "x"}};
    const auto g = build_graph(t);
    CHECK(g.entity_count() == 1);
    CHECK(g.incident(0).size() == 1);
}

TEST_CASE("persist and load") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto path = dir / "graf_kg_test.txt";
    persist_graph(build_graph({}), path);
    CHECK(load_graph(path).empty());

    std::vector<Triplet> t{{"Court of Appeal", "has", "secretary"}, {"secretary", "appointed by", "president"},
                           {"president", "leads", "Court of Appeal"}};
    const auto g = build_graph(t);
    persist_graph(g, path);
    const auto back = load_graph(path);
    CHECK(equivalent(g, back));
    CHECK(serialize_graph(back) == serialize_graph(g));

    {
        std::ofstream out(path);
        out << "(a;r;b)\n(a;r;b)\n(broken\n";
    }
    try {
        (void)load_graph(path);
        FAIL("expected an error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("graph invariants on random triplet lists") {
    std::mt19937_64 rng(11);
    const std::vector<std::string> names{"a", "A", "b", " b", "c d", "C  D", "e", "f"};
    const std::vector<std::string> rels{"r", "s", "R"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Triplet> ts;
        const std::size_t n = rng() % 15;
        for (std::size_t i = 0; i < n; ++i) {
            ts.push_back({names[rng() % names.size()], rels[rng() % rels.size()], names[rng() % names.size()]});
        }
        const auto g = build_graph(ts);
        CHECK(g.edge_count() <= ts.size());
        CHECK(g.entity_count() <= 2 * ts.size());
        for (EntityId v = 0; v < g.entity_count(); ++v) {
            std::set<EdgeId> expect;
            for (EdgeId e = 0; e < g.edge_count(); ++e) {
                if (g.edge(e).head == v || g.edge(e).tail == v) expect.insert(e);
            }
            std::set<EdgeId> got;
            for (const auto& inc : g.incident(v)) got.insert(inc.edge);
            CHECK(got == expect);
        }
        CHECK(equivalent(deserialize_graph(serialize_graph(g)), g));
    }
}
