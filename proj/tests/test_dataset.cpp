#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <set>

#include "graf/dataset.hpp"

using namespace graf;

namespace {

std::string record(const std::string& id, const std::string& targets, const std::string& exam = "promotion") {
    return R"({"id":")" + id + R"(","question":"Q?","choices":[{"label":"A","text":"a"},{"label":"B","text":"b"},{"label":"C","text":"c"}],"targets":)" +
           targets + R"(,"exam_type":")" + exam + R"("})";
}

std::vector<MCQAItem> make_items(std::size_t n) {
    std::vector<MCQAItem> items;
    for (std::size_t i = 0; i < n; ++i) {
        items.push_back(parse_mcqa(record("q" + std::to_string(i), R"(["A"])")).front());
    }
    return items;
}

std::multiset<std::string> ids(const std::vector<MCQAItem>& v) {
    std::multiset<std::string> s;
    for (const auto& it : v) s.insert(it.id);
    return s;
}

}  // namespace

TEST_CASE("load examples") {
    const auto items = parse_mcqa(record("q1", R"(["A"])"));
    REQUIRE(items.size() == 1);
    CHECK(items[0].targets.size() == 1);
    CHECK(items[0].exam_type == ExamType::promotion);
    CHECK(items[0].choice("B").text == "b");
    CHECK_THROWS_AS(parse_mcqa(record("q1", R"(["A","B","C"])", "entrance")), DatasetError);
    CHECK(parse_mcqa("").empty());
    CHECK(parse_mcqa("\n\n").empty());
}

TEST_CASE("validation rules") {
    CHECK_NOTHROW(parse_mcqa(record("q", R"(["A","C"])", "bar")));
    CHECK_THROWS_AS(parse_mcqa(record("q", R"(["A","C"])", "promotion")), DatasetError);
    CHECK_THROWS_AS(parse_mcqa(record("q", R"([])")), DatasetError);
    CHECK_THROWS_AS(parse_mcqa(record("q", R"(["D"])")), DatasetError);
    CHECK_THROWS_AS(parse_mcqa(record("q", R"(["A"])", "quiz")), std::exception);
    try {
        (void)parse_mcqa(record("a", R"(["A"])") + "\n{not json\n", "file.jsonl");
        FAIL("expected an error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("file.jsonl:2") != std::string::npos);
    }
}

TEST_CASE("serialization round-trip") {
    auto items = parse_mcqa(record("q1", R"(["A"])") + "\n" + record("q2", R"(["B","C"])", "entrance"));
    items[0].domain_tag = "procedură";
    std::string text;
    for (const auto& it : items) text += to_jsonl(it) + "\n";
    CHECK(parse_mcqa(text) == items);
    const auto path = std::filesystem::temp_directory_path() / "graf_ds_test.jsonl";
    save_mcqa(items, path);
    CHECK(load_mcqa(path) == items);
    std::filesystem::remove(path);
}

TEST_CASE("split examples") {
    const auto items = make_items(10);
    const auto all = split_dataset(items, {1, 0, 0}, 3);
    CHECK(all.train.size() == 10);
    CHECK(all.test.empty());
    const auto a = split_dataset(items, {0.7, 0.2, 0.1}, 42);
    const auto b = split_dataset(items, {0.7, 0.2, 0.1}, 42);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.validation == b.validation);
    CHECK(a.train.size() == 7);
    CHECK(a.test.size() == 2);
    CHECK(a.validation.size() == 1);
    CHECK_THROWS(split_dataset(items, {0.5, 0.2, 0.1}, 0));
    CHECK_THROWS(split_dataset(items, {1.2, -0.2, 0.0}, 0));
}

TEST_CASE("split partitions for all seeds and sizes") {
    for (std::size_t n = 0; n < 25; ++n) {
        const auto items = make_items(n);
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            const auto s = split_dataset(items, {0.5, 0.3, 0.2}, seed);
            CHECK(s.train.size() + s.test.size() + s.validation.size() == n);
            auto merged = ids(s.train);
            for (const auto& x : ids(s.test)) merged.insert(x);
            for (const auto& x : ids(s.validation)) merged.insert(x);
            CHECK(merged == ids(items));
            // floor-then-distribute oracle
            std::size_t tr = n / 2, te = (3 * n) / 10, va = n / 5;
            std::size_t left = n - tr - te - va;
            for (std::size_t* p : {&tr, &te, &va}) {
                if (left == 0) break;
                ++*p;
                --left;
            }
            CHECK(s.train.size() == tr);
            CHECK(s.test.size() == te);
            CHECK(s.validation.size() == va);
        }
    }
}
