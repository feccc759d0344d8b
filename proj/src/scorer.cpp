#include "graf/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace graf {

namespace {

void fill_uniform(std::span<double> t, double scale, std::mt19937_64& rng) {
    for (double& x : t) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        x = (2.0 * u - 1.0) * scale;
    }
}

template <class T>
void append(std::vector<T>& out, std::vector<T>&& more) {
    out.insert(out.end(), more.begin(), more.end());
}

}  // namespace

ScorerParams ScorerParams::zeros(std::size_t d) { return {Matrix(d, d), Matrix(d, d), Matrix(d, d), Vector(d, 0.0)}; }

ScorerParams ScorerParams::random(std::size_t d, double scale, std::mt19937_64& rng) {
    ScorerParams p = zeros(d);
    for (auto t : p.tensors()) fill_uniform(t, scale, rng);
    return p;
}

void ScorerParams::validate() const {
    const std::size_t d = dim();
    for (const Matrix* w : {&w_query, &w_key, &w_value}) {
        if (w->rows() != d || w->cols() != d) throw std::invalid_argument("ScorerParams: projections must be d x d");
    }
    for (auto t : tensors()) {
        for (double x : t) {
            if (!std::isfinite(x)) throw std::invalid_argument("ScorerParams: non-finite entry");
        }
    }
}

std::vector<std::span<double>> ScorerParams::tensors() {
    return {w_query.flat(), w_key.flat(), w_value.flat(), std::span<double>(w_final)};
}

std::vector<std::span<const double>> ScorerParams::tensors() const {
    return {w_query.flat(), w_key.flat(), w_value.flat(), std::span<const double>(w_final)};
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (auto t : tensors()) n += t.size();
    return n;
}

Model Model::zeros(std::size_t dim, std::size_t heads, double leaky_slope) {
    return {GatParams::zeros(dim, dim, heads, leaky_slope), ScorerParams::zeros(dim)};
}

Model Model::random(std::size_t dim, std::size_t heads, std::uint64_t seed, double leaky_slope) {
    if (dim == 0 || heads == 0) throw std::invalid_argument("Model: dim and heads must be positive");
    std::mt19937_64 rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    Model m = zeros(dim, heads, leaky_slope);
    for (auto t : m.tensors()) fill_uniform(t, scale, rng);
    return m;
}

void Model::validate() const {
    gat.validate();
    scorer.validate();
    if (gat.d_in() != scorer.dim() || gat.d_out() != scorer.dim()) {
        throw std::invalid_argument("Model: encoder and scorer dimensions differ");
    }
}

std::vector<std::span<double>> Model::tensors() {
    auto out = gat.tensors();
    append(out, scorer.tensors());
    return out;
}

std::vector<std::span<const double>> Model::tensors() const {
    auto out = gat.tensors();
    append(out, scorer.tensors());
    return out;
}

Vector Model::flatten() const {
    Vector flat;
    flat.reserve(parameter_count());
    for (auto t : tensors()) flat.insert(flat.end(), t.begin(), t.end());
    return flat;
}

void Model::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw std::invalid_argument("Model::assign: wrong parameter count");
    std::size_t pos = 0;
    for (auto t : tensors()) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), t.size(), t.begin());
        pos += t.size();
    }
}

Matrix relevance_matrix(const Matrix& claim_reps, const Matrix& kg_reps) {
    if (claim_reps.rows() > 0 && kg_reps.rows() > 0 && claim_reps.cols() != kg_reps.cols()) {
        throw std::invalid_argument("relevance_matrix: representation widths differ");
    }
    Matrix r(claim_reps.rows(), kg_reps.rows());
    for (std::size_t i = 0; i < claim_reps.rows(); ++i) {
        for (std::size_t j = 0; j < kg_reps.rows(); ++j) r(i, j) = cosine(claim_reps.row(i), kg_reps.row(j));
    }
    return r;
}

Matrix aggregate_claims(const Matrix& relevance, const Matrix& kg_reps) {
    if (relevance.cols() != kg_reps.rows()) throw std::invalid_argument("aggregate_claims: inner dimensions differ");
    Matrix out(relevance.rows(), kg_reps.cols());
    for (std::size_t i = 0; i < relevance.rows(); ++i) {
        for (std::size_t j = 0; j < relevance.cols(); ++j) {
            if (relevance(i, j) != 0.0) kernels::axpy(relevance(i, j), kg_reps.row(j), out.row(i));
        }
    }
    return out;
}

AttentionOutput self_attention(const Matrix& seq, const ScorerParams& p) {
    const std::size_t d = p.dim();
    if (seq.cols() != d) throw std::invalid_argument("self_attention: sequence width does not match parameters");
    const std::size_t len = seq.rows();
    AttentionOutput out;
    out.queries = transform_rows(p.w_query, seq);
    out.keys = transform_rows(p.w_key, seq);
    out.values = transform_rows(p.w_value, seq);
    out.attention = Matrix(len, len);
    out.output = Matrix(len, d);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t t = 0; t < len; ++t) {
        auto row = out.attention.row(t);
        double mx = -INFINITY;
        for (std::size_t s = 0; s < len; ++s) {
            row[s] = kernels::dot(out.queries.row(t), out.keys.row(s)) * inv_sqrt_d;
            mx = std::max(mx, row[s]);
        }
        double sum = 0.0;
        for (double& x : row) {
            x = std::exp(x - mx);
            sum += x;
        }
        for (double& x : row) x /= sum;
        for (std::size_t s = 0; s < len; ++s) kernels::axpy(row[s], out.values.row(s), out.output.row(t));
    }
    return out;
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

ScoreTrace score_forward(const PreparedChoice& in, const Model& model) {
    const std::size_t d = model.dim();
    if (in.context.size() != d) throw std::invalid_argument("score_forward: context width does not match the model");
    ScoreTrace tr;
    tr.claim_gat = gat_forward(in.claims, model.gat);
    tr.kg_gat = gat_forward(in.subgraph, model.gat);
    const Matrix& hc = tr.claim_gat.output;
    const Matrix& hs = tr.kg_gat.output;
    tr.relevance = relevance_matrix(hc, hs);
    tr.aggregated = hs.rows() > 0 ? aggregate_claims(tr.relevance, hs) : Matrix(hc.rows(), d);

    tr.sequence = Matrix(1 + tr.aggregated.rows(), d);
    std::copy(in.context.begin(), in.context.end(), tr.sequence.row(0).begin());
    for (std::size_t i = 0; i < tr.aggregated.rows(); ++i) {
        std::copy_n(tr.aggregated.row(i).begin(), d, tr.sequence.row(i + 1).begin());
    }
    tr.attention = self_attention(tr.sequence, model.scorer);
    tr.fused.assign(tr.attention.output.row(0).begin(), tr.attention.output.row(0).end());
    tr.logit = kernels::dot(model.scorer.w_final, tr.fused);
    tr.probability = sigmoid(tr.logit);
    return tr;
}

void score_backward(const PreparedChoice& in, const Model& model, const ScoreTrace& tr, double d_logit,
                    std::span<const double> d_fused_extra, Model& grad, Vector* d_context) {
    const std::size_t d = model.dim();
    const ScorerParams& sp = model.scorer;
    ScorerParams& gs = grad.scorer;

    // score = sigmoid(w . c_final)
    Vector d_fused(d, 0.0);
    kernels::axpy(d_logit, sp.w_final, d_fused);
    if (!d_fused_extra.empty()) kernels::axpy(1.0, d_fused_extra, d_fused);
    kernels::axpy(d_logit, tr.fused, gs.w_final);

    // c_final is row 0 of A V; only that row reaches the loss.
    const AttentionOutput& at = tr.attention;
    const std::size_t len = tr.sequence.rows();
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    const auto attn0 = at.attention.row(0);
    Matrix d_values(len, d);
    Matrix d_keys(len, d);
    Vector d_query0(d, 0.0);
    std::vector<double> d_attn(len);
    double weighted = 0.0;
    for (std::size_t s = 0; s < len; ++s) {
        d_attn[s] = kernels::dot(d_fused, at.values.row(s));
        weighted += attn0[s] * d_attn[s];
        kernels::axpy(attn0[s], d_fused, d_values.row(s));
    }
    for (std::size_t s = 0; s < len; ++s) {
        const double d_score = attn0[s] * (d_attn[s] - weighted) * inv_sqrt_d;
        if (d_score == 0.0) continue;
        kernels::axpy(d_score, at.keys.row(s), d_query0);
        kernels::axpy(d_score, at.queries.row(0), d_keys.row(s));
    }
    Matrix d_seq(len, d);
    outer_acc(d_query0, tr.sequence.row(0), gs.w_query);
    matvec_t_acc(sp.w_query, d_query0, d_seq.row(0));
    for (std::size_t s = 0; s < len; ++s) {
        outer_acc(d_keys.row(s), tr.sequence.row(s), gs.w_key);
        matvec_t_acc(sp.w_key, d_keys.row(s), d_seq.row(s));
        outer_acc(d_values.row(s), tr.sequence.row(s), gs.w_value);
        matvec_t_acc(sp.w_value, d_values.row(s), d_seq.row(s));
    }
    if (d_context != nullptr) d_context->assign(d_seq.row(0).begin(), d_seq.row(0).end());

    const Matrix& hc = tr.claim_gat.output;
    const Matrix& hs = tr.kg_gat.output;
    const std::size_t nc = hc.rows();
    const std::size_t ns = hs.rows();
    if (nc == 0 || ns == 0) return;   // nothing upstream of the sequence depends on the graphs

    // aggregated = R hs
    Matrix d_hc(nc, d);
    Matrix d_hs(ns, d);
    Matrix d_rel(nc, ns);
    for (std::size_t i = 0; i < nc; ++i) {
        const auto d_agg = d_seq.row(i + 1);
        for (std::size_t j = 0; j < ns; ++j) {
            d_rel(i, j) = kernels::dot(d_agg, hs.row(j));
            if (tr.relevance(i, j) != 0.0) kernels::axpy(tr.relevance(i, j), d_agg, d_hs.row(j));
        }
    }

    // R(i, j) = cos(hc_i, hs_j); zero-norm rows have R = 0 and no gradient
    std::vector<double> norm_c(nc), norm_s(ns);
    for (std::size_t i = 0; i < nc; ++i) norm_c[i] = std::sqrt(norm2(hc.row(i)));
    for (std::size_t j = 0; j < ns; ++j) norm_s[j] = std::sqrt(norm2(hs.row(j)));
    for (std::size_t i = 0; i < nc; ++i) {
        if (norm_c[i] == 0.0) continue;
        for (std::size_t j = 0; j < ns; ++j) {
            if (norm_s[j] == 0.0 || d_rel(i, j) == 0.0) continue;
            const double g = d_rel(i, j);
            const double r = tr.relevance(i, j);
            const double inv_prod = 1.0 / (norm_c[i] * norm_s[j]);
            kernels::axpy(g * inv_prod, hs.row(j), d_hc.row(i));
            kernels::axpy(-g * r / (norm_c[i] * norm_c[i]), hc.row(i), d_hc.row(i));
            kernels::axpy(g * inv_prod, hc.row(i), d_hs.row(j));
            kernels::axpy(-g * r / (norm_s[j] * norm_s[j]), hs.row(j), d_hs.row(j));
        }
    }

    gat_backward(in.claims, model.gat, tr.claim_gat, d_hc, grad.gat);
    gat_backward(in.subgraph, model.gat, tr.kg_gat, d_hs, grad.gat);
}

PreparedChoice Pipeline::prepare(const MCQAItem& item, const Label& label) const {
    const Choice& choice = item.choice(label);
    PreparedChoice out;
    out.item_id = item.id;
    out.label = label;
    std::string joined = item.question + " " + choice.text;
    if (options_.use_claims) {
        ExtractionResult ex = extractor_->extract(item.question, choice.text);
        out.extraction_warning = ex.empty_warning;
        out.claim_entities = ex.graph.entity_count();
        out.claim_edges = ex.graph.edge_count();
        out.claims = encode_graph(ex.graph, *encoder_);
    } else {
        out.claims = encode_graph(ClaimGraph{}, *encoder_);
    }
    if (options_.use_kg && sampler_ != nullptr) {
        SubGraph sg = sampler_->sample(joined);
        out.subgraph_entities = sg.graph.entity_count();
        out.subgraph_edges = sg.graph.edge_count();
        out.subgraph = encode_graph(sg.graph, *encoder_);
    } else {
        out.subgraph = encode_graph(KnowledgeGraph{}, *encoder_);
    }
    out.context = encoder_->embed(joined);
    return out;
}

ChoiceScore score_prepared(const PreparedChoice& in, const Model& model) {
    const ScoreTrace tr = score_forward(in, model);
    ChoiceScore s;
    s.label = in.label;
    s.probability = tr.probability;
    s.subgraph_entities = in.subgraph_entities;
    s.claim_edges = in.claim_edges;
    s.empty_claims = in.claim_entities == 0;
    s.empty_subgraph = in.subgraph_entities == 0;
    s.extraction_warning = in.extraction_warning;
    return s;
}

ChoiceScore score_choice(const MCQAItem& item, const Label& label, const Pipeline& pipeline, const Model& model) {
    return score_prepared(pipeline.prepare(item, label), model);
}

LabelSet select_answers(const std::map<Label, double>& scores, Cardinality cardinality) {
    if (scores.empty()) throw std::invalid_argument("select_answers: no scores");
    std::vector<std::pair<Label, double>> ranked(scores.begin(), scores.end());
    // map order is label order, so a stable sort breaks ties by label
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::size_t k = 0;
    if (cardinality) {
        if (*cardinality == 0) throw std::invalid_argument("select_answers: cardinality must be at least 1");
        if (*cardinality > ranked.size()) throw std::invalid_argument("select_answers: cardinality exceeds choice count");
        k = *cardinality;
    } else {
        k = static_cast<std::size_t>(
            std::count_if(ranked.begin(), ranked.end(), [](const auto& e) { return e.second >= 0.5; }));
        k = std::clamp<std::size_t>(k, 1, std::min<std::size_t>(2, ranked.size()));
    }
    LabelSet out;
    for (std::size_t i = 0; i < k; ++i) out.insert(ranked[i].first);
    return out;
}

}  // namespace graf
