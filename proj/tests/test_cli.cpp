#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "graf/cli.hpp"
#include "graf/evaluation.hpp"
#include "graf/kg.hpp"

using namespace graf;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("graf_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    auto r = cli({});
    CHECK(r.code == 2);
    CHECK(r.err.find("build-kg") != std::string::npos);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"build-kg", "--bogus", "x"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("build-kg on the example block") {
    const auto dir = scratch("build");
    const auto graph = dir / "kg.txt";
    const auto r = cli({"build-kg", std::string(GRAF_FIXTURE_DIR) + "/example_triplets_en.txt", "-o", graph.string()});
    REQUIRE(r.code == 0);
    const auto kg = load_graph(graph);
    CHECK(kg.edge_count() == 15);
    const auto again = dir / "kg2.txt";
    REQUIRE(cli({"build-kg", graph.string(), "-o", again.string()}).code == 0);
    CHECK(slurp(graph) == slurp(again));
    CHECK(cli({"build-kg", (dir / "missing.txt").string(), "-o", again.string()}).code == 1);
}

TEST_CASE("end to end: synth, train, answer, eval, agreement, difficulty") {
    const auto dir = scratch("e2e");
    const std::string d = dir.string();
    REQUIRE(cli({"synth", "--out-dir", d, "--train", "6", "--heldout", "3"}).code == 0);
    REQUIRE(cli({"build-kg", d + "/triplets.txt", "-o", d + "/kg.txt"}).code == 0);
    auto r = cli({"train", "--kg", d + "/kg.txt", "--dataset", d + "/train.jsonl", "--validation", d + "/heldout.jsonl",
                  "--checkpoint", d + "/model.ck", "--log", d + "/log.csv", "--lr", "1e-2", "--epochs", "3", "--dim",
                  "16", "--heads", "2", "--seed", "0"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("best_epoch") != std::string::npos);
    const std::string log = slurp(d + "/log.csv");
    CHECK(log.starts_with("epoch,mean_loss,train_accuracy,validation_accuracy,loss_evaluations\n"));
    CHECK(std::count(log.begin(), log.end(), '\n') == 4);

    r = cli({"answer", "--kg", d + "/kg.txt", "--dataset", d + "/heldout.jsonl", "--checkpoint", d + "/model.ck",
             "--out", d + "/pred1.jsonl", "--jobs", "1", "--cardinality", "gold"});
    REQUIRE(r.code == 0);
    r = cli({"answer", "--kg", d + "/kg.txt", "--dataset", d + "/heldout.jsonl", "--checkpoint", d + "/model.ck",
             "--out", d + "/pred2.jsonl", "--jobs", "3", "--cardinality", "gold"});
    REQUIRE(r.code == 0);
    CHECK(slurp(d + "/pred1.jsonl") == slurp(d + "/pred2.jsonl"));
    const auto preds = load_predictions(d + "/pred1.jsonl");
    CHECK(preds.size() == 3);
    CHECK(std::is_sorted(preds.begin(), preds.end(), [](const auto& a, const auto& b) { return a.id < b.id; }));

    r = cli({"eval", "--predictions", d + "/pred1.jsonl", "--dataset", d + "/heldout.jsonl", "--csv", d + "/eval.csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.starts_with("items 3 accuracy "));
    CHECK(slurp(d + "/eval.csv").starts_with("group,items,accuracy\nall,3,"));

    r = cli({"agreement", d + "/pred1.jsonl", d + "/pred2.jsonl"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("appa 100.000000") != std::string::npos);
    CHECK(cli({"agreement", d + "/pred1.jsonl"}).code == 2);

    r = cli({"difficulty", d + "/pred1.jsonl", "--dataset", d + "/heldout.jsonl"});
    REQUIRE(r.code == 0);
    CHECK(r.out.starts_with("topic,items,zscore\n"));

    r = cli({"answer", "--kg", d + "/kg.txt", "--dataset", d + "/heldout.jsonl", "--checkpoint", d + "/model.ck",
             "--cardinality", "sometimes"});
    CHECK(r.code == 2);
    r = cli({"answer", "--kg", d + "/kg.txt", "--dataset", d + "/heldout.jsonl", "--checkpoint", d + "/model.ck",
             "--client", "carrier-pigeon"});
    CHECK(r.code == 2);
}

TEST_CASE("sample, extract and tfidf") {
    const auto dir = scratch("misc");
    const std::string d = dir.string();
    {
        std::ofstream out(d + "/corpus.txt");
        out << "The (court;has;clerk) rule.\nA (clerk;files;appeal) and more words here\n";
    }
    auto r = cli({"extract", d + "/corpus.txt", "-o", d + "/t.txt", "--chunk-size", "50", "--overlap", "25",
                  "--dump-prompts", d});
    REQUIRE(r.code == 0);
    // normalization strips the parentheses, so the pattern client finds nothing
    CHECK(r.out.find("chunks 2") != std::string::npos);
    CHECK(slurp(d + "/t.txt").ends_with("STOP\n"));
    std::size_t prompts = 0;
    for (const auto& e : fs::directory_iterator(dir)) prompts += e.path().string().ends_with(".prompt.txt") ? 1 : 0;
    CHECK(prompts == 2);

    {
        std::ofstream out(d + "/t.txt");
        out << "(court;has;clerk)\n(clerk;files;appeal)\nSTOP\n";
    }
    REQUIRE(cli({"build-kg", d + "/t.txt", "-o", d + "/kg.txt"}).code == 0);
    r = cli({"sample", "--kg", d + "/kg.txt", "--query", "who files an appeal", "--top-k", "1", "--depth", "1"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["seeds"].size() == 1);
    CHECK(j["entities"].size() == 2);
    CHECK(j["edges"].size() == 1);

    r = cli({"tfidf", d + "/corpus.txt", "--top", "3"});
    REQUIRE(r.code == 0);
    CHECK(r.out.starts_with("term,score\n"));
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 4);
}
