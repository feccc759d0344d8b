#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "graf/claims.hpp"
#include "graf/dataset.hpp"
#include "graf/gat.hpp"
#include "graf/retrieval.hpp"

namespace graf {

struct ScorerParams {
    Matrix w_query;   // d x d
    Matrix w_key;     // d x d
    Matrix w_value;   // d x d
    Vector w_final;   // d

    std::size_t dim() const noexcept { return w_final.size(); }
    static ScorerParams zeros(std::size_t d);
    static ScorerParams random(std::size_t d, double scale, std::mt19937_64& rng);
    void validate() const;

    std::vector<std::span<double>> tensors();
    std::vector<std::span<const double>> tensors() const;
};

/// Everything that is trained: the shared graph encoder and the scorer.
struct Model {
    GatParams gat;
    ScorerParams scorer;

    std::size_t dim() const noexcept { return scorer.dim(); }
    std::size_t parameter_count() const;

    static Model zeros(std::size_t dim, std::size_t heads, double leaky_slope = 0.2);
    /// Uniform(-1/sqrt(dim), 1/sqrt(dim)) entries from a seeded generator.
    static Model random(std::size_t dim, std::size_t heads, std::uint64_t seed, double leaky_slope = 0.2);
    void validate() const;

    std::vector<std::span<double>> tensors();
    std::vector<std::span<const double>> tensors() const;
    Vector flatten() const;
    void assign(std::span<const double> flat);
};

/// R(i, j) = cos(claim row i, KG row j).
Matrix relevance_matrix(const Matrix& claim_reps, const Matrix& kg_reps);

/// H = R · kg_reps.
Matrix aggregate_claims(const Matrix& relevance, const Matrix& kg_reps);

struct AttentionOutput {
    Matrix output;      // same shape as the input sequence
    Matrix attention;   // L x L, rows sum to 1
    Matrix queries;
    Matrix keys;
    Matrix values;
};

/// Single-head scaled dot-product attention over the rows of `seq`, with
/// q = W_Q x, k = W_K x, v = W_V x and weights softmax(q_t . k_s / sqrt(d)).
AttentionOutput self_attention(const Matrix& seq, const ScorerParams& p);

double sigmoid(double x) noexcept;

/// Inputs of the scorer for one (question, choice) pair. Everything here
/// is fixed during training, so it is computed once per choice.
struct PreparedChoice {
    std::string item_id;
    Label label;
    EncodedGraph claims;
    EncodedGraph subgraph;
    Vector context;   // embed(question + " " + choice)
    std::size_t claim_entities = 0;
    std::size_t claim_edges = 0;
    std::size_t subgraph_entities = 0;
    std::size_t subgraph_edges = 0;
    bool extraction_warning = false;
};

struct ScoreTrace {
    GatForward claim_gat;
    GatForward kg_gat;
    Matrix relevance;
    Matrix aggregated;
    Matrix sequence;
    AttentionOutput attention;
    Vector fused;   // c_final
    double logit = 0.0;
    double probability = 0.5;
};

/// GAT on both graphs, relevance, aggregation, self-attention over
/// [context ; aggregated], then sigmoid(w_final . c_final).
ScoreTrace score_forward(const PreparedChoice& in, const Model& model);

/// Reverse mode from dL/dlogit and dL/dc_final (either may be zero) into
/// `grad`. Optionally returns dL/dcontext.
void score_backward(const PreparedChoice& in, const Model& model, const ScoreTrace& trace, double d_logit,
                    std::span<const double> d_fused, Model& grad, Vector* d_context = nullptr);

struct PipelineOptions {
    bool use_claims = true;
    bool use_kg = true;
};

/// Binds extraction, sampling and encoding for scoring. The referenced
/// objects must outlive the pipeline. `sampler` may be null, which behaves
/// like use_kg = false.
class Pipeline {
public:
    Pipeline(const ClaimExtractor& extractor, const SubgraphSampler* sampler, const Encoder& encoder,
             PipelineOptions options = {})
        : extractor_(&extractor), sampler_(sampler), encoder_(&encoder), options_(options) {}

    PreparedChoice prepare(const MCQAItem& item, const Label& label) const;
    const Encoder& encoder() const noexcept { return *encoder_; }
    const PipelineOptions& options() const noexcept { return options_; }

private:
    const ClaimExtractor* extractor_;
    const SubgraphSampler* sampler_;
    const Encoder* encoder_;
    PipelineOptions options_;
};

struct ChoiceScore {
    Label label;
    double probability = 0.5;
    std::size_t subgraph_entities = 0;
    std::size_t claim_edges = 0;
    bool empty_claims = false;
    bool empty_subgraph = false;
    bool extraction_warning = false;
};

ChoiceScore score_prepared(const PreparedChoice& in, const Model& model);
ChoiceScore score_choice(const MCQAItem& item, const Label& label, const Pipeline& pipeline, const Model& model);

/// Number of answers to select: a fixed count, or nullopt for "auto".
using Cardinality = std::optional<std::size_t>;

/// Fixed cardinality: the k most probable labels (ties by label order).
/// Auto: labels with probability >= 0.5, at least one and at most two.
LabelSet select_answers(const std::map<Label, double>& scores, Cardinality cardinality);

}  // namespace graf
