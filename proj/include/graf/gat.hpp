#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "graf/embedding.hpp"
#include "graf/kg.hpp"
#include "graf/matrix.hpp"

namespace graf {

/// Node and edge features of one graph plus its undirected incidence
/// structure. Row i of `nodes` is entity i; row j of `edges` is edge j.
class EncodedGraph {
public:
    EncodedGraph() = default;
    EncodedGraph(Matrix nodes, Matrix edges, std::vector<std::pair<std::uint32_t, std::uint32_t>> endpoints);

    const Matrix& nodes() const noexcept { return nodes_; }
    const Matrix& edges() const noexcept { return edges_; }
    std::size_t node_count() const noexcept { return nodes_.rows(); }
    std::size_t edge_count() const noexcept { return edges_.rows(); }
    std::size_t dim() const noexcept { return nodes_.cols(); }
    const std::pair<std::uint32_t, std::uint32_t>& endpoints(std::size_t e) const { return endpoints_.at(e); }

    /// Incident edge ids of node i, ascending; a self-loop appears once.
    std::span<const std::uint32_t> incident_edges(std::size_t i) const {
        return {edge_ids_.data() + edge_offsets_[i], edge_offsets_[i + 1] - edge_offsets_[i]};
    }
    /// Distinct neighbors of node i in order of first incident edge.
    std::span<const std::uint32_t> neighbors(std::size_t i) const {
        return {neighbor_ids_.data() + neighbor_offsets_[i], neighbor_offsets_[i + 1] - neighbor_offsets_[i]};
    }

    std::size_t incident_offset(std::size_t i) const { return edge_offsets_.at(i); }
    std::size_t neighbor_offset(std::size_t i) const { return neighbor_offsets_.at(i); }
    std::size_t incidence_count() const noexcept { return edge_ids_.size(); }
    std::size_t neighbor_pair_count() const noexcept { return neighbor_ids_.size(); }

private:
    Matrix nodes_;
    Matrix edges_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> endpoints_;
    std::vector<std::size_t> edge_offsets_{0};
    std::vector<std::uint32_t> edge_ids_;
    std::vector<std::size_t> neighbor_offsets_{0};
    std::vector<std::uint32_t> neighbor_ids_;
};

/// Entity names and relation labels embedded by `encoder`.
EncodedGraph encode_graph(const KnowledgeGraph& graph, const Encoder& encoder);

struct GatHead {
    Matrix w_node;   // d_out x d_in
    Matrix w_edge;   // d_out x d_in
    Vector a_node;   // 2 d_out: [target part | neighbor part]
    Vector a_edge;   // 2 d_out: [target part | edge part]
};

struct GatParams {
    std::vector<GatHead> heads;
    double leaky_slope = 0.2;

    std::size_t head_count() const noexcept { return heads.size(); }
    std::size_t d_in() const noexcept { return heads.empty() ? 0 : heads.front().w_node.cols(); }
    std::size_t d_out() const noexcept { return heads.empty() ? 0 : heads.front().w_node.rows(); }

    /// All entries zero, same shapes.
    static GatParams zeros(std::size_t d_in, std::size_t d_out, std::size_t heads, double leaky_slope = 0.2);
    /// Entries uniform in (-scale, scale).
    static GatParams random(std::size_t d_in, std::size_t d_out, std::size_t heads, double scale,
                            std::mt19937_64& rng, double leaky_slope = 0.2);

    /// Throws std::invalid_argument when shapes disagree, an entry is not
    /// finite, there are no heads, or the slope is outside (0, 1).
    void validate() const;

    std::vector<std::span<double>> tensors();
    std::vector<std::span<const double>> tensors() const;
};

/// Per-head intermediates kept for the backward pass.
struct GatHeadCache {
    Matrix node_proj;            // W_N h_N, n x d_out
    Matrix edge_proj;            // W_E h_E, m x d_out
    std::vector<double> edge_pre;    // a_E^T [..] per (node, incident edge), CSR by node
    std::vector<double> edge_attn;
    std::vector<double> node_pre;    // a_N^T [..] per (node, neighbor), CSR by node
    std::vector<double> node_attn;
};

struct GatForward {
    Matrix output;   // n x d_out, mean over heads of h'_N + h'_E
    std::vector<GatHeadCache> heads;

    /// Attention weights of node i over its incident edges / neighbors.
    std::span<const double> edge_attention(const EncodedGraph& g, std::size_t head, std::size_t node) const;
    std::span<const double> node_attention(const EncodedGraph& g, std::size_t head, std::size_t node) const;
};

double leaky_relu(double x, double slope) noexcept;

/// Relation-aware graph attention. Per head and node i:
///   e_E(i,j) = LeakyReLU(a_E . [W_N h_i || W_E h_ej]) over incident edges j
///   e_N(i,k) = LeakyReLU(a_N . [W_N h_i || W_N h_k]) over neighbors k
///   h'_i = softmax(e_N) W_N h_N + softmax(e_E) W_E h_E
/// Heads are averaged. A node without edges gets a zero row.
GatForward gat_forward(const EncodedGraph& g, const GatParams& p);

/// Reverse mode for gat_forward. Gradients are added into `grad`, and into
/// `d_nodes` / `d_edges` when given (shapes of g.nodes() / g.edges()).
void gat_backward(const EncodedGraph& g, const GatParams& p, const GatForward& fwd, const Matrix& upstream,
                  GatParams& grad, Matrix* d_nodes = nullptr, Matrix* d_edges = nullptr);

}  // namespace graf
