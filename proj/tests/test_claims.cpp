#include "doctest.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "graf/claims.hpp"

using namespace graf;

namespace {

std::string read_fixture(const std::string& name) {
    std::ifstream in(std::string(GRAF_FIXTURE_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Replies in order; the last reply repeats.
class ScriptedClient final : public CompletionClient {
public:
    explicit ScriptedClient(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    std::string complete(const std::string& prompt) const override {
        last_prompt = prompt;
        const std::size_t i = std::min(calls++, replies_.size() - 1);
        return replies_[i];
    }
    mutable std::size_t calls = 0;
    mutable std::string last_prompt;

private:
    std::vector<std::string> replies_;
};

}  // namespace

TEST_CASE("prompt rendering") {
    const std::string p = render_prompt("X");
    const auto block = parse_triplet_block(read_fixture("example_triplets_en.txt"));
    for (const auto& t : block.triplets) CHECK(p.find(format_triplet(t)) != std::string::npos);
    CHECK(p.find("Text:\nX") != std::string::npos);
    CHECK(prompt_document(p) == "X");

    const std::string empty = render_prompt("");
    CHECK(prompt_document(empty).empty());
    CHECK(empty.find("Text:\n\n") != std::string::npos);

    const std::string ro = render_prompt("Y", PromptLanguage::ro);
    CHECK(ro.find("(entitate;relație;entitate)") != std::string::npos);
    CHECK(prompt_document(ro) == "Y");
    const auto ro_block = parse_triplet_block(read_fixture("example_triplets_ro.txt"));
    for (const auto& t : ro_block.triplets) CHECK(ro.find(format_triplet(t)) != std::string::npos);

    CHECK(parse_prompt_language("ro") == PromptLanguage::ro);
    CHECK_THROWS(parse_prompt_language("fr"));
    CHECK(prompt_hash(p) == prompt_hash(render_prompt("X")));
    CHECK(prompt_hash(p) != prompt_hash(empty));
    CHECK(prompt_hash(p).size() == 16);
}

TEST_CASE("extract_claims examples") {
    CannedClient echo("(a;r;b)\nSTOP");
    auto r = extract_claims("q", "c", echo);
    CHECK(r.graph.entity_count() == 2);
    CHECK(r.graph.edge_count() == 1);
    CHECK_FALSE(r.empty_warning);
    CHECK(r.attempts == 1);

    CannedClient stop("STOP");
    r = extract_claims("q", "c", stop);
    CHECK(r.graph.empty());
    CHECK(r.empty_warning);
    CHECK(r.attempts == 2);

    CannedClient full(read_fixture("example_completion_en.txt"));
    r = extract_claims("q", "c", full);
    CHECK(r.graph.edge_count() == 15);
    const auto expect = parse_triplet_block(read_fixture("example_triplets_en.txt")).triplets;
    CHECK(r.graph.triplets() == expect);
}

TEST_CASE("one retry after an empty parse") {
    ScriptedClient c({"nothing useful", "(x;y;z)\nSTOP"});
    const auto r = extract_claims("Question?", "Choice.", c);
    CHECK(c.calls == 2);
    CHECK(r.attempts == 2);
    CHECK(r.graph.edge_count() == 1);
    CHECK(r.skipped_lines == 1);
    CHECK(prompt_document(c.last_prompt) == "Question? Choice.");
}

TEST_CASE("stub extraction") {
    CHECK(stub_extract("Scenario (self-defense;applies to;unauthorized access) end.").edge_count() == 1);
    CHECK(stub_extract("no pattern here").empty());
    CHECK(stub_extract("(a;r;b) and (c;s;d)").edge_count() == 2);
    const auto g = stub_extract("(a;r;b) (b;s;c)");
    for (EntityId v = 0; v < g.entity_count(); ++v) CHECK_FALSE(g.incident(v).empty());
    StubClaimExtractor s;
    const auto r1 = s.extract("(q;r;s)", "(a;r;b)");
    CHECK(r1.graph.edge_count() == 2);
    CHECK(equivalent(r1.graph, s.extract("(q;r;s)", "(a;r;b)").graph));
    CHECK(NullClaimExtractor().extract("(a;r;b)", "(c;r;d)").graph.empty());
}

TEST_CASE("pattern client echoes the embedded triplets") {
    PatternClient p;
    const auto r = extract_claims("Is (a;r;b) true?", "Yes, and (b;s;c).", p);
    CHECK(r.graph.edge_count() == 2);
    CHECK(p.complete(render_prompt("nothing")) == "STOP\n");
}

TEST_CASE("fixture client") {
    const auto dir = std::filesystem::temp_directory_path() / "graf_fixture_client";
    std::filesystem::create_directories(dir);
    const std::string prompt = render_prompt("Some text. another");
    {
        std::ofstream out(dir / (prompt_hash(prompt) + ".txt"));
        out << "(some text;is;here)\nSTOP\n";
    }
    FixtureClient fc(dir);
    CHECK(fc.complete(prompt).starts_with("(some text"));
    CHECK_THROWS_AS(fc.complete(render_prompt("missing")), ClientError);
    CHECK_THROWS_AS(FixtureClient(dir / "nope"), ClientError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("http client against a local server") {
    httplib::Server srv;
    std::string seen_auth, seen_model, seen_prompt;
    srv.Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        const auto body = nlohmann::json::parse(req.body);
        seen_model = body.at("model").get<std::string>();
        seen_prompt = body.at("prompt").get<std::string>();
        res.set_content(R"({"choices":[{"text":"(a;r;b)\nSTOP"}]})", "application/json");
    });
    srv.Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"choices":[{"message":{"content":"(c;r;d)\nSTOP"}}]})", "application/json");
    });
    srv.Post("/fail", [&](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
        res.set_content("busy", "text/plain");
    });
    srv.Post("/empty", [&](const httplib::Request&, httplib::Response& res) { res.set_content("{}", "application/json"); });
    const int port = srv.bind_to_any_port("127.0.0.1");
    std::thread th([&] { srv.listen_after_bind(); });
    srv.wait_until_ready();
    const std::string base = "http://127.0.0.1:" + std::to_string(port);

    HttpClient c(base + "/v1/completions", "tiny", "secret", 5);
    const auto r = extract_claims("q", "c", c);
    CHECK(r.graph.edge_count() == 1);
    CHECK(seen_auth == "Bearer secret");
    CHECK(seen_model == "tiny");
    CHECK(prompt_document(seen_prompt) == "q c");

    CHECK(HttpClient(base + "/chat", "m").complete("p").starts_with("(c;r;d)"));
    CHECK_THROWS_AS(HttpClient(base + "/fail", "m").complete("p"), ClientError);
    CHECK_THROWS_AS(HttpClient(base + "/empty", "m").complete("p"), ClientError);
    CHECK_THROWS_AS(HttpClient("https://example.org", "m"), ClientError);

    srv.stop();
    th.join();
}
