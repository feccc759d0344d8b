#include "graf/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace graf {

using nlohmann::json;

std::string_view to_string(ExamType t) noexcept {
    switch (t) {
        case ExamType::entrance: return "entrance";
        case ExamType::bar: return "bar";
        case ExamType::promotion: return "promotion";
    }
    return "promotion";
}

ExamType parse_exam_type(std::string_view s) {
    if (s == "entrance") return ExamType::entrance;
    if (s == "bar") return ExamType::bar;
    if (s == "promotion") return ExamType::promotion;
    throw DatasetError("unknown exam_type '" + std::string(s) + "'");
}

const Choice& MCQAItem::choice(const Label& label) const {
    for (const auto& c : choices) {
        if (c.label == label) return c;
    }
    throw DatasetError("item " + id + ": no choice labeled '" + label + "'");
}

void validate(const MCQAItem& item) {
    auto fail = [&](const std::string& why) { throw DatasetError("item " + item.id + ": " + why); };
    if (item.id.empty()) throw DatasetError("item with empty id");
    if (item.choices.size() != 3) fail("expected 3 choices, got " + std::to_string(item.choices.size()));
    std::set<Label> seen;
    for (const auto& c : item.choices) {
        if (c.label != "A" && c.label != "B" && c.label != "C") fail("choice label '" + c.label + "' is not A, B or C");
        if (!seen.insert(c.label).second) fail("duplicate choice label '" + c.label + "'");
        if (c.text.empty()) fail("choice " + c.label + " has empty text");
    }
    if (item.targets.empty() || item.targets.size() > 2) {
        fail("expected 1 or 2 targets, got " + std::to_string(item.targets.size()));
    }
    for (const auto& t : item.targets) {
        if (!seen.contains(t)) fail("target '" + t + "' is not a choice label");
    }
    if (item.exam_type == ExamType::promotion && item.targets.size() != 1) {
        fail("promotion items have exactly one target");
    }
}

namespace {

MCQAItem item_from_json(const json& j) {
    MCQAItem item;
    item.id = j.at("id").get<std::string>();
    item.question = j.at("question").get<std::string>();
    for (const auto& c : j.at("choices")) {
        item.choices.push_back({c.at("label").get<std::string>(), c.at("text").get<std::string>()});
    }
    const auto& targets = j.at("targets");
    for (const auto& t : targets) item.targets.insert(t.get<std::string>());
    if (item.targets.size() != targets.size()) throw DatasetError("item " + item.id + ": duplicate target labels");
    item.domain_tag = j.value("domain_tag", std::string{});
    item.exam_type = parse_exam_type(j.at("exam_type").get<std::string>());
    return item;
}

}  // namespace

std::vector<MCQAItem> parse_mcqa(std::string_view jsonl, std::string_view source) {
    std::vector<MCQAItem> items;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        auto nl = jsonl.find('\n', pos);
        if (nl == std::string_view::npos) nl = jsonl.size();
        std::string_view line = jsonl.substr(pos, nl - pos);
        pos = nl + 1;
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        MCQAItem item;
        try {
            item = item_from_json(json::parse(line));
        } catch (const DatasetError& e) {
            throw DatasetError(std::string(source) + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const json::exception& e) {
            throw DatasetError(std::string(source) + ":" + std::to_string(lineno) + ": malformed record: " + e.what());
        }
        validate(item);
        items.push_back(std::move(item));
    }
    return items;
}

std::vector<MCQAItem> load_mcqa(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open dataset " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_mcqa(buf.str(), path.string());
}

std::string to_jsonl(const MCQAItem& item) {
    json j;
    j["id"] = item.id;
    j["question"] = item.question;
    j["choices"] = json::array();
    for (const auto& c : item.choices) j["choices"].push_back({{"label", c.label}, {"text", c.text}});
    j["targets"] = json::array();
    for (const auto& t : item.targets) j["targets"].push_back(t);
    j["domain_tag"] = item.domain_tag;
    j["exam_type"] = to_string(item.exam_type);
    return j.dump();
}

void save_mcqa(const std::vector<MCQAItem>& items, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError("cannot write dataset " + path.string());
    for (const auto& item : items) out << to_jsonl(item) << '\n';
    if (!out) throw DatasetError("write failed for " + path.string());
}

DatasetSplit split_dataset(const std::vector<MCQAItem>& items, SplitRatios ratios, std::uint64_t seed) {
    const std::array<double, 3> r{ratios.train, ratios.test, ratios.validation};
    for (double x : r) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("split ratios must be non-negative");
    }
    if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw std::invalid_argument("split ratios must sum to 1");

    const std::size_t n = items.size();
    std::array<std::size_t, 3> sizes{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        // a tiny slack keeps 0.7 * 10 at 7 despite binary rounding
        sizes[k] = static_cast<std::size_t>(std::floor(r[k] * static_cast<double>(n) + 1e-9));
        assigned += sizes[k];
    }
    while (assigned > n) {
        for (std::size_t k = 3; k-- > 0 && assigned > n;) {
            if (sizes[k] > 0) {
                --sizes[k];
                --assigned;
            }
        }
    }
    for (std::size_t k = 0; assigned < n; k = (k + 1) % 3) {
        if (r[k] > 0.0) {
            ++sizes[k];
            ++assigned;
        }
    }

    // Fisher-Yates driven by raw mt19937_64 output so the permutation does
    // not depend on the standard library's distribution implementation.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }

    DatasetSplit split;
    std::array<std::vector<MCQAItem>*, 3> parts{&split.train, &split.test, &split.validation};
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t c = 0; c < sizes[k]; ++c) parts[k]->push_back(items[order[cursor++]]);
    }
    return split;
}

}  // namespace graf
