#include "graf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace graf {

namespace {

void require_same_ids(const Selections& a, const Selections& b, const char* what) {
    if (a.size() != b.size() ||
        !std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) { return x.first == y.first; })) {
        throw std::invalid_argument(std::string(what) + ": item ids differ");
    }
}

}  // namespace

double exam_accuracy(const Selections& predictions, const Selections& gold) {
    require_same_ids(predictions, gold, "exam_accuracy");
    if (gold.empty()) throw std::invalid_argument("exam_accuracy: no items");
    std::size_t hits = 0;
    for (const auto& [id, sel] : predictions) hits += sel == gold.at(id) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(gold.size());
}

Selections gold_selections(std::span<const MCQAItem> items) {
    Selections out;
    for (const auto& it : items) {
        if (!out.emplace(it.id, it.targets).second) throw std::invalid_argument("duplicate item id " + it.id);
    }
    return out;
}

RunResult make_run_result(std::string model_id, Selections selected, const Selections& gold) {
    require_same_ids(selected, gold, "make_run_result");
    RunResult r{std::move(model_id), std::move(selected), {}};
    for (const auto& [id, sel] : r.selected) r.correct[id] = sel == gold.at(id);
    return r;
}

double appa(std::span<const RunResult> runs) {
    if (runs.size() < 2) throw std::invalid_argument("appa: need at least two runs");
    for (const auto& r : runs) require_same_ids(r.selected, runs[0].selected, "appa");
    const double n_items = static_cast<double>(runs[0].selected.size());
    if (n_items == 0) throw std::invalid_argument("appa: no items");
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < runs.size(); ++a) {
        for (std::size_t b = a + 1; b < runs.size(); ++b) {
            std::size_t same = 0;
            auto ib = runs[b].selected.begin();
            for (const auto& [id, sel] : runs[a].selected) same += (sel == (ib++)->second) ? 1 : 0;
            total += 100.0 * static_cast<double>(same) / n_items;
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

double fleiss_kappa(const RatingMatrix& ratings) {
    if (ratings.empty()) throw std::invalid_argument("fleiss_kappa: no items");
    const std::size_t k = ratings[0].size();
    std::size_t n = 0;
    for (std::size_t c : ratings[0]) n += c;
    if (n < 2) throw std::invalid_argument("fleiss_kappa: need at least two raters per item");
    std::vector<double> column(k, 0.0);
    double p_bar = 0.0;
    for (std::size_t i = 0; i < ratings.size(); ++i) {
        if (ratings[i].size() != k) throw std::invalid_argument("fleiss_kappa: ragged rating matrix");
        std::size_t sum = 0;
        double sq = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            sum += ratings[i][j];
            sq += static_cast<double>(ratings[i][j]) * static_cast<double>(ratings[i][j]);
            column[j] += static_cast<double>(ratings[i][j]);
        }
        if (sum != n) {
            throw std::invalid_argument("fleiss_kappa: row " + std::to_string(i) + " sums to " + std::to_string(sum) +
                                        ", expected " + std::to_string(n));
        }
        const double nd = static_cast<double>(n);
        p_bar += (sq - nd) / (nd * (nd - 1.0));
    }
    const double N = static_cast<double>(ratings.size());
    p_bar /= N;
    double p_e = 0.0;
    for (double c : column) {
        const double p = c / (N * static_cast<double>(n));
        p_e += p * p;
    }
    if (p_e >= 1.0) return 1.0;
    return (p_bar - p_e) / (1.0 - p_e);
}

std::string category_of(const LabelSet& s) {
    std::string out;
    for (const auto& l : s) out += l;
    return out;
}

std::vector<std::string> single_answer_categories() { return {"A", "B", "C"}; }
std::vector<std::string> pooled_categories() { return {"A", "B", "C", "AB", "AC", "BC"}; }

RatingMatrix rating_matrix(std::span<const RunResult> runs, const std::vector<std::string>& categories) {
    if (runs.empty()) throw std::invalid_argument("rating_matrix: no runs");
    for (const auto& r : runs) require_same_ids(r.selected, runs[0].selected, "rating_matrix");
    std::map<std::string, std::size_t> col;
    for (std::size_t j = 0; j < categories.size(); ++j) col.emplace(categories[j], j);
    RatingMatrix m;
    for (const auto& [id, unused] : runs[0].selected) {
        std::vector<std::size_t> row(categories.size(), 0);
        for (const auto& r : runs) {
            const std::string cat = category_of(r.selected.at(id));
            auto it = col.find(cat);
            if (it == col.end()) {
                throw std::invalid_argument("rating_matrix: run " + r.model_id + " selected '" + cat + "' for " + id +
                                            ", not in the category set");
            }
            ++row[it->second];
        }
        m.push_back(std::move(row));
    }
    return m;
}

std::map<std::string, double> tfidf_scores(std::span<const text::TokenSeq> corpus) {
    if (corpus.empty()) throw std::invalid_argument("tfidf_scores: empty corpus");
    std::map<std::string, std::size_t> count;
    std::map<std::string, std::size_t> df;
    std::size_t total = 0;
    for (const auto& doc : corpus) {
        std::set<std::string> seen;
        for (const auto& t : doc) {
            ++count[t];
            if (seen.insert(t).second) ++df[t];
        }
        total += doc.size();
    }
    std::map<std::string, double> out;
    const double docs = static_cast<double>(corpus.size());
    for (const auto& [t, c] : count) {
        out[t] = static_cast<double>(c) / static_cast<double>(total) * std::log(docs / static_cast<double>(df[t]));
    }
    return out;
}

DifficultyResult difficulty_zscores(std::span<const RunResult> runs, const std::map<std::string, std::string>& topics) {
    if (runs.empty()) throw std::invalid_argument("difficulty_zscores: no runs");
    if (topics.empty()) throw std::invalid_argument("difficulty_zscores: no items");
    DifficultyResult res;
    for (const auto& r : runs) {
        double sum = 0.0;
        for (const auto& [id, topic] : topics) {
            auto it = r.correct.find(id);
            if (it == r.correct.end()) throw std::invalid_argument("difficulty_zscores: run " + r.model_id + " lacks item " + id);
            sum += it->second ? 1.0 : 0.0;
        }
        const double n = static_cast<double>(topics.size());
        const double mu = sum / n;
        double var = 0.0;
        for (const auto& [id, topic] : topics) {
            const double d = (r.correct.at(id) ? 1.0 : 0.0) - mu;
            var += d * d;
        }
        const double sigma = std::sqrt(var / n);
        res.model_mean[r.model_id] = mu;
        res.model_stddev[r.model_id] = sigma;
        auto& zm = res.z[r.model_id];
        for (const auto& [id, topic] : topics) {
            const double s = r.correct.at(id) ? 1.0 : 0.0;
            const double z = sigma > 0.0 ? (s - mu) / sigma : 0.0;
            zm[id] = z;
            res.topic_score[topic] += z;
        }
    }
    for (const auto& [id, topic] : topics) ++res.topic_items[topic];
    for (auto& [topic, score] : res.topic_score) {
        score /= static_cast<double>(res.topic_items[topic] * runs.size());
    }
    return res;
}

std::string predictions_to_jsonl(std::span<const Prediction> predictions) {
    std::string out;
    for (const auto& p : predictions) {
        nlohmann::ordered_json j;
        j["id"] = p.id;
        nlohmann::ordered_json probs = nlohmann::ordered_json::object();
        for (const auto& [l, v] : p.probabilities) probs[l] = v;
        j["probabilities"] = probs;
        j["selected"] = std::vector<std::string>(p.selected.begin(), p.selected.end());
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<Prediction> parse_predictions(std::string_view jsonl, const std::string& source) {
    std::vector<Prediction> out;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        try {
            const auto j = nlohmann::json::parse(line);
            Prediction p;
            p.id = j.at("id").get<std::string>();
            if (j.contains("probabilities")) {
                for (const auto& [k, v] : j.at("probabilities").items()) p.probabilities[k] = v.get<double>();
            }
            for (const auto& l : j.at("selected")) p.selected.insert(l.get<std::string>());
            if (!ids.insert(p.id).second) throw std::invalid_argument("duplicate id " + p.id);
            out.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(where + e.what());
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(where + e.what());
        }
    }
    return out;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_predictions(ss.str(), path.string());
}

Selections selections_of(std::span<const Prediction> predictions) {
    Selections s;
    for (const auto& p : predictions) s[p.id] = p.selected;
    return s;
}

std::map<std::string, std::string> load_topics(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (text::trim(line).empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw std::invalid_argument(path.string() + ":" + std::to_string(n) + ": expected id<TAB>topic");
        out[std::string(text::trim(line.substr(0, tab)))] = std::string(text::trim(line.substr(tab + 1)));
    }
    return out;
}

}  // namespace graf
