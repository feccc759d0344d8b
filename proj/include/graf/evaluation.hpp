#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "graf/dataset.hpp"
#include "graf/text.hpp"

namespace graf {

using Selections = std::map<std::string, LabelSet>;   // item id -> selected labels

/// Exact-match accuracy. Both sides must cover the same item ids.
double exam_accuracy(const Selections& predictions, const Selections& gold);

Selections gold_selections(std::span<const MCQAItem> items);

struct RunResult {
    std::string model_id;
    Selections selected;
    std::map<std::string, bool> correct;
};

RunResult make_run_result(std::string model_id, Selections selected, const Selections& gold);

/// Mean over unordered run pairs of the percentage of items with identical
/// selected sets. Requires at least two runs over the same ids.
double appa(std::span<const RunResult> runs);

using RatingMatrix = std::vector<std::vector<std::size_t>>;   // items x categories

/// Fleiss' kappa. Every row must sum to the same n >= 2.
double fleiss_kappa(const RatingMatrix& ratings);

/// "A", "AB", ... for a label set.
std::string category_of(const LabelSet& s);

/// Category names for the given exam style: single answers {A, B, C} or
/// single and double answers {A, B, C, AB, AC, BC}.
std::vector<std::string> single_answer_categories();
std::vector<std::string> pooled_categories();

/// One row per item (sorted by id), one column per category, counting how
/// many runs selected that category. Throws if a run selected a set that is
/// not listed in `categories`, or if runs cover different ids.
RatingMatrix rating_matrix(std::span<const RunResult> runs, const std::vector<std::string>& categories);

/// score(t) = count(t) / total tokens * ln(|C| / df(t)).
std::map<std::string, double> tfidf_scores(std::span<const text::TokenSeq> corpus);

struct DifficultyResult {
    std::map<std::string, double> topic_score;   // mean z over items in topic and models
    std::map<std::string, std::size_t> topic_items;
    std::map<std::string, double> model_mean;
    std::map<std::string, double> model_stddev;   // population
    /// z[model][item]
    std::map<std::string, std::map<std::string, double>> z;
};

/// Per-model z-scores of item correctness (sigma = 0 gives z = 0), averaged
/// per topic. Every run must cover every item in `topics`.
DifficultyResult difficulty_zscores(std::span<const RunResult> runs, const std::map<std::string, std::string>& topics);

struct Prediction {
    std::string id;
    std::map<Label, double> probabilities;
    LabelSet selected;
};

/// One JSON object per line: {"id", "probabilities": {label: p}, "selected": [..]}.
std::string predictions_to_jsonl(std::span<const Prediction> predictions);
std::vector<Prediction> parse_predictions(std::string_view jsonl, const std::string& source = "<memory>");
std::vector<Prediction> load_predictions(const std::filesystem::path& path);
Selections selections_of(std::span<const Prediction> predictions);

/// id TAB topic per line.
std::map<std::string, std::string> load_topics(const std::filesystem::path& path);

}  // namespace graf
