#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "graf/kg.hpp"
#include "graf/text.hpp"

namespace graf {

struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;
};

struct ScoredDoc {
    std::size_t doc;
    double score;

    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// Okapi BM25 over an in-memory inverted index. Document ids are positions
/// in the input sequence.
class Bm25Index {
public:
    struct Posting {
        std::size_t doc;
        std::size_t tf;
    };

    explicit Bm25Index(std::vector<text::TokenSeq> documents, Bm25Params params = {});

    std::size_t size() const noexcept { return doc_lengths_.size(); }
    std::size_t document_frequency(const std::string& term) const;
    std::size_t document_length(std::size_t doc) const { return doc_lengths_.at(doc); }
    double average_length() const noexcept { return avg_length_; }
    const Bm25Params& params() const noexcept { return params_; }

    /// ln((N - df + 0.5) / (df + 0.5) + 1)
    double idf(std::size_t df) const noexcept;
    /// Contribution of one query term with frequency tf in a document of
    /// length len. Exposed so callers scoring a single document agree
    /// bit-for-bit with rank().
    double term_weight(std::size_t tf, std::size_t df, std::size_t len) const noexcept;

    /// Top min(k, N) documents, score-descending, ties by ascending id.
    /// Every query token counts, so repeated tokens weigh more.
    std::vector<ScoredDoc> rank(const text::TokenSeq& query, std::size_t k) const;

private:
    Bm25Params params_;
    std::vector<std::size_t> doc_lengths_;
    double avg_length_ = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

inline std::vector<ScoredDoc> bm25_rank(const Bm25Index& index, const text::TokenSeq& query, std::size_t k) {
    return index.rank(query, k);
}

struct Chunk {
    std::size_t article;
    std::size_t start;
    text::TokenSeq tokens;
};

/// Fixed-size windows over each article; consecutive windows start
/// size - overlap tokens apart and the last one may be shorter.
std::vector<Chunk> chunk_corpus(std::span<const text::TokenSeq> articles, std::size_t size = 50,
                                std::size_t overlap = 25);

struct SampleConfig {
    std::size_t top_k = 10;
    std::size_t depth = 1;
    std::size_t max_entities = 50;
    /// Add neighbor entity names to each entity's retrieval document.
    bool neighbor_names_in_document = false;
    Bm25Params bm25{};

    void validate() const;
};

/// Query-relevant slice of a knowledge graph. `origin[i]` is the id in the
/// source graph of subgraph entity i; seeds are subgraph ids.
struct SubGraph {
    KnowledgeGraph graph;
    std::vector<EntityId> seeds;
    std::vector<EntityId> origin;
};

/// Entity retrieval index over a fixed graph; reuse it across queries.
class SubgraphSampler {
public:
    SubgraphSampler(const KnowledgeGraph& kg, SampleConfig config = {}, const text::LemmaTable* lemmas = nullptr);

    const SampleConfig& config() const noexcept { return config_; }

    /// BM25 seeds the top_k entities, an undirected BFS expands them to
    /// `depth` hops, and selection stops at max_entities (seeds first, then
    /// frontier nodes in seed-rank order, neighbors in edge-id order). The
    /// result is the induced subgraph.
    SubGraph sample(std::string_view query) const;

    /// Entity ids in selection order (ids of the source graph).
    std::vector<EntityId> select(std::string_view query) const;

    const text::TokenSeq& entity_document(EntityId id) const { return documents_.at(id); }

private:
    const KnowledgeGraph* kg_;
    SampleConfig config_;
    const text::LemmaTable* lemmas_;
    std::vector<text::TokenSeq> documents_;
    Bm25Index index_;
};

SubGraph sample_subgraph(const KnowledgeGraph& kg, std::string_view query, const SampleConfig& config = {},
                         const text::LemmaTable* lemmas = nullptr);

/// Induced subgraph over `entities` (ids of `kg`, in the order given).
SubGraph induced_subgraph(const KnowledgeGraph& kg, std::span<const EntityId> entities, std::size_t seed_count);

}  // namespace graf
