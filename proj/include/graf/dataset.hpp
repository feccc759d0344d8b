#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace graf {

using Label = std::string;
using LabelSet = std::set<Label>;

enum class ExamType { entrance, bar, promotion };

std::string_view to_string(ExamType t) noexcept;
ExamType parse_exam_type(std::string_view s);

struct Choice {
    Label label;
    std::string text;

    friend bool operator==(const Choice&, const Choice&) = default;
};

/// One exam question: three labeled choices and one or two correct labels.
struct MCQAItem {
    std::string id;
    std::string question;
    std::vector<Choice> choices;
    LabelSet targets;
    std::string domain_tag;
    ExamType exam_type = ExamType::promotion;

    const Choice& choice(const Label& label) const;
    bool is_target(const Label& label) const { return targets.contains(label); }

    friend bool operator==(const MCQAItem&, const MCQAItem&) = default;
};

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws DatasetError naming the item id when an invariant does not hold.
void validate(const MCQAItem& item);

/// Reads a JSON-lines dataset. Blank lines are skipped; a malformed line
/// throws with its line number.
std::vector<MCQAItem> load_mcqa(const std::filesystem::path& path);
std::vector<MCQAItem> parse_mcqa(std::string_view jsonl, std::string_view source = "<memory>");

std::string to_jsonl(const MCQAItem& item);
void save_mcqa(const std::vector<MCQAItem>& items, const std::filesystem::path& path);

struct SplitRatios {
    double train = 1.0;
    double test = 0.0;
    double validation = 0.0;
};

struct DatasetSplit {
    std::vector<MCQAItem> train;
    std::vector<MCQAItem> test;
    std::vector<MCQAItem> validation;
};

/// Seeded shuffle, then contiguous parts. Part sizes are floor(ratio * n)
/// with the remainder handed out one item at a time in (train, test,
/// validation) order, skipping parts whose ratio is zero.
DatasetSplit split_dataset(const std::vector<MCQAItem>& items, SplitRatios ratios, std::uint64_t seed);

}  // namespace graf
