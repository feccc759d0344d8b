#include "graf/synthetic.hpp"

#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace graf {

namespace {

constexpr const char* kRelations[] = {"governs", "requires", "permits", "limits", "defines"};
constexpr std::size_t kRelationCount = sizeof(kRelations) / sizeof(kRelations[0]);

class NameSource {
public:
    explicit NameSource(std::uint64_t seed) : rng_(seed) {}

    std::string fresh() {
        for (;;) {
            std::string name = word() + " " + word();
            if (used_.insert(name).second) return name;
        }
    }

    std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

private:
    std::string word() {
        static constexpr char consonants[] = "bcdfgklmnprstvz";
        static constexpr char vowels[] = "aeiou";
        std::string w;
        const std::size_t syllables = 2 + pick(2);
        for (std::size_t i = 0; i < syllables; ++i) {
            w += consonants[pick(sizeof(consonants) - 1)];
            w += vowels[pick(sizeof(vowels) - 1)];
        }
        return w;
    }

    std::mt19937_64 rng_;
    std::set<std::string> used_;
};

std::string choice_text(const std::vector<Triplet>& facts) {
    std::string s = "It follows that";
    for (std::size_t i = 0; i < facts.size(); ++i) {
        s += i == 0 ? " " : " and ";
        s += format_triplet(facts[i]);
    }
    return s + ".";
}

}  // namespace

SyntheticFixture make_synthetic_fixture(const SyntheticConfig& config) {
    if (config.claims_per_choice == 0) throw std::invalid_argument("synthetic: claims_per_choice must be positive");
    if (config.relation_count == 0 || config.relation_count > kRelationCount) {
        throw std::invalid_argument("synthetic: relation_count must be in 1..5");
    }
    const std::size_t relations = config.relation_count;
    SyntheticFixture fx;
    NameSource names(config.seed);
    const std::size_t total = config.train_items + config.heldout_items;
    static const Label labels[] = {"A", "B", "C"};

    for (std::size_t q = 0; q < total; ++q) {
        MCQAItem item;
        item.id = "syn" + std::string(q < 10 ? "00" : q < 100 ? "0" : "") + std::to_string(q);
        item.question = "Under the applicable provision, which of the following statements holds?";
        item.domain_tag = "topic" + std::to_string(q % 3);

        const bool two = config.double_answer_every > 0 && q % config.double_answer_every == config.double_answer_every - 1;
        item.exam_type = two ? ExamType::entrance : ExamType::promotion;
        std::set<std::size_t> correct{names.pick(3)};
        while (two && correct.size() < 2) correct.insert(names.pick(3));

        std::vector<std::string> pool;   // entities of this question present in the graph
        for (std::size_t c = 0; c < 3; ++c) {
            const bool right = correct.contains(c);
            std::vector<Triplet> facts;
            std::string head = names.fresh();
            if (right) pool.push_back(head);
            for (std::size_t k = 0; k < config.claims_per_choice; ++k) {
                std::string tail = names.fresh();
                if (right) pool.push_back(tail);
                facts.push_back({head, kRelations[names.pick(relations)], tail});
                head = tail;
            }
            if (right) fx.triplets.insert(fx.triplets.end(), facts.begin(), facts.end());
            item.choices.push_back({labels[c], choice_text(facts)});
            if (right) item.targets.insert(labels[c]);
        }
        for (std::size_t e = 0; e < config.extra_edges; ++e) {
            const std::string& from = pool[names.pick(pool.size())];
            std::string to = names.fresh();
            fx.triplets.push_back({from, kRelations[names.pick(relations)], to});
            pool.push_back(std::move(to));
        }
        validate(item);
        (q < config.train_items ? fx.train : fx.heldout).push_back(std::move(item));
    }
    fx.kg = build_graph(fx.triplets);
    return fx;
}

}  // namespace graf
