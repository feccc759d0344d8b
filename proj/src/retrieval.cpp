#include "graf/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace graf {

Bm25Index::Bm25Index(std::vector<text::TokenSeq> documents, Bm25Params params) : params_(params) {
    if (!(params_.k1 > 0.0)) throw std::invalid_argument("BM25 k1 must be positive");
    if (!(params_.b >= 0.0 && params_.b <= 1.0)) throw std::invalid_argument("BM25 b must lie in [0, 1]");
    doc_lengths_.reserve(documents.size());
    std::size_t total = 0;
    std::unordered_map<std::string, std::size_t> tf;
    for (std::size_t d = 0; d < documents.size(); ++d) {
        tf.clear();
        for (auto& token : documents[d]) ++tf[token];
        for (auto& [term, count] : tf) postings_[term].push_back({d, count});
        doc_lengths_.push_back(documents[d].size());
        total += documents[d].size();
    }
    avg_length_ = documents.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(documents.size());
}

std::size_t Bm25Index::document_frequency(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

double Bm25Index::idf(std::size_t df) const noexcept {
    const double n = static_cast<double>(doc_lengths_.size());
    const double f = static_cast<double>(df);
    return std::log((n - f + 0.5) / (f + 0.5) + 1.0);
}

double Bm25Index::term_weight(std::size_t tf, std::size_t df, std::size_t len) const noexcept {
    const double f = static_cast<double>(tf);
    const double norm = 1.0 - params_.b + params_.b * static_cast<double>(len) / avg_length_;
    return idf(df) * (f * (params_.k1 + 1.0)) / (f + params_.k1 * norm);
}

std::vector<ScoredDoc> Bm25Index::rank(const text::TokenSeq& query, std::size_t k) const {
    std::vector<double> scores(doc_lengths_.size(), 0.0);
    for (const auto& term : query) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const std::size_t df = it->second.size();
        for (const auto& p : it->second) scores[p.doc] += term_weight(p.tf, df, doc_lengths_[p.doc]);
    }
    std::vector<ScoredDoc> ranked;
    ranked.reserve(scores.size());
    for (std::size_t d = 0; d < scores.size(); ++d) ranked.push_back({d, scores[d]});
    const std::size_t keep = std::min(k, ranked.size());
    auto better = [](const ScoredDoc& a, const ScoredDoc& b) {
        return a.score != b.score ? a.score > b.score : a.doc < b.doc;
    };
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), better);
    ranked.resize(keep);
    return ranked;
}

std::vector<Chunk> chunk_corpus(std::span<const text::TokenSeq> articles, std::size_t size, std::size_t overlap) {
    if (size == 0) throw std::invalid_argument("chunk size must be positive");
    if (overlap >= size) throw std::invalid_argument("chunk overlap must be smaller than the chunk size");
    const std::size_t step = size - overlap;
    std::vector<Chunk> chunks;
    for (std::size_t a = 0; a < articles.size(); ++a) {
        const auto& tokens = articles[a];
        for (std::size_t start = 0; start < tokens.size(); start += step) {
            const std::size_t end = std::min(tokens.size(), start + size);
            chunks.push_back({a, start, text::TokenSeq(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                                                       tokens.begin() + static_cast<std::ptrdiff_t>(end))});
        }
    }
    return chunks;
}

void SampleConfig::validate() const {
    if (top_k < 1) throw std::invalid_argument("top_k must be at least 1");
    if (max_entities < top_k) throw std::invalid_argument("max_entities must be at least top_k");
}

namespace {

std::vector<text::TokenSeq> entity_documents(const KnowledgeGraph& kg, const SampleConfig& config,
                                             const text::LemmaTable* lemmas) {
    std::vector<text::TokenSeq> docs(kg.entity_count());
    for (EntityId v = 0; v < kg.entity_count(); ++v) {
        auto& doc = docs[v];
        doc = text::normalize(kg.name(v), lemmas);
        for (const auto& inc : kg.incident(v)) {
            for (auto& t : text::normalize(kg.edge(inc.edge).relation, lemmas)) doc.push_back(std::move(t));
            if (config.neighbor_names_in_document && inc.other != v) {
                for (auto& t : text::normalize(kg.name(inc.other), lemmas)) doc.push_back(std::move(t));
            }
        }
    }
    return docs;
}

}  // namespace

SubgraphSampler::SubgraphSampler(const KnowledgeGraph& kg, SampleConfig config, const text::LemmaTable* lemmas)
    : kg_(&kg),
      config_((config.validate(), config)),
      lemmas_(lemmas),
      documents_(entity_documents(kg, config_, lemmas)),
      index_(documents_, config_.bm25) {}

std::vector<EntityId> SubgraphSampler::select(std::string_view query) const {
    std::vector<EntityId> selected;
    if (kg_->empty()) return selected;
    const auto ranked = index_.rank(text::normalize(query, lemmas_), config_.top_k);
    std::vector<bool> taken(kg_->entity_count(), false);
    for (const auto& r : ranked) {
        // the ranking already caps at top_k <= max_entities
        selected.push_back(static_cast<EntityId>(r.doc));
        taken[r.doc] = true;
    }
    std::vector<EntityId> frontier = selected;
    for (std::size_t level = 0; level < config_.depth && selected.size() < config_.max_entities; ++level) {
        std::vector<EntityId> next;
        for (EntityId v : frontier) {
            for (const auto& inc : kg_->incident(v)) {
                if (taken[inc.other]) continue;
                if (selected.size() >= config_.max_entities) break;
                taken[inc.other] = true;
                selected.push_back(inc.other);
                next.push_back(inc.other);
            }
            if (selected.size() >= config_.max_entities) break;
        }
        if (next.empty()) break;
        frontier = std::move(next);
    }
    return selected;
}

SubGraph SubgraphSampler::sample(std::string_view query) const {
    const auto selected = select(query);
    const std::size_t seeds = std::min<std::size_t>(selected.size(), std::min(config_.top_k, kg_->entity_count()));
    return induced_subgraph(*kg_, selected, seeds);
}

SubGraph induced_subgraph(const KnowledgeGraph& kg, std::span<const EntityId> entities, std::size_t seed_count) {
    SubGraph sg;
    KnowledgeGraph::Builder b;
    std::vector<EntityId> local(kg.entity_count(), static_cast<EntityId>(-1));
    for (EntityId v : entities) {
        local[v] = b.add_entity(kg.name(v));
        sg.origin.push_back(v);
    }
    std::vector<EdgeId> edge_ids;
    for (EntityId v : entities) {
        for (const auto& inc : kg.incident(v)) {
            if (local[inc.other] != static_cast<EntityId>(-1)) edge_ids.push_back(inc.edge);
        }
    }
    std::sort(edge_ids.begin(), edge_ids.end());
    edge_ids.erase(std::unique(edge_ids.begin(), edge_ids.end()), edge_ids.end());
    for (EdgeId e : edge_ids) {
        const Edge& edge = kg.edge(e);
        b.add_edge(local[edge.head], edge.relation, local[edge.tail]);
    }
    sg.graph = std::move(b).finish();
    for (std::size_t i = 0; i < seed_count && i < entities.size(); ++i) sg.seeds.push_back(static_cast<EntityId>(i));
    return sg;
}

SubGraph sample_subgraph(const KnowledgeGraph& kg, std::string_view query, const SampleConfig& config,
                         const text::LemmaTable* lemmas) {
    return SubgraphSampler(kg, config, lemmas).sample(query);
}

}  // namespace graf
