#include "graf/gat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace graf {

EncodedGraph::EncodedGraph(Matrix nodes, Matrix edges, std::vector<std::pair<std::uint32_t, std::uint32_t>> endpoints)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), endpoints_(std::move(endpoints)) {
    const std::size_t n = nodes_.rows();
    if (endpoints_.size() != edges_.rows()) throw std::invalid_argument("EncodedGraph: one endpoint pair per edge row");
    if (edges_.rows() > 0 && edges_.cols() != nodes_.cols()) {
        throw std::invalid_argument("EncodedGraph: node and edge features differ in width");
    }
    std::vector<std::vector<std::uint32_t>> inc(n);
    for (std::size_t e = 0; e < endpoints_.size(); ++e) {
        auto [h, t] = endpoints_[e];
        if (h >= n || t >= n) throw std::invalid_argument("EncodedGraph: edge endpoint out of range");
        inc[h].push_back(static_cast<std::uint32_t>(e));
        if (t != h) inc[t].push_back(static_cast<std::uint32_t>(e));
    }
    edge_offsets_.assign(1, 0);
    neighbor_offsets_.assign(1, 0);
    std::vector<char> seen(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t first_neighbor = neighbor_ids_.size();
        for (std::uint32_t e : inc[i]) {
            edge_ids_.push_back(e);
            auto [h, t] = endpoints_[e];
            const std::uint32_t other = h == i ? t : h;
            if (!seen[other]) {
                seen[other] = 1;
                neighbor_ids_.push_back(other);
            }
        }
        for (std::size_t k = first_neighbor; k < neighbor_ids_.size(); ++k) seen[neighbor_ids_[k]] = 0;
        edge_offsets_.push_back(edge_ids_.size());
        neighbor_offsets_.push_back(neighbor_ids_.size());
    }
}

EncodedGraph encode_graph(const KnowledgeGraph& graph, const Encoder& encoder) {
    const std::size_t d = encoder.dim();
    Matrix nodes(graph.entity_count(), d);
    for (EntityId i = 0; i < graph.entity_count(); ++i) {
        const Vector v = encoder.embed(graph.name(i));
        std::copy(v.begin(), v.end(), nodes.row(i).begin());
    }
    Matrix edges(graph.edge_count(), d);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> endpoints;
    endpoints.reserve(graph.edge_count());
    for (EdgeId e = 0; e < graph.edge_count(); ++e) {
        const Edge& edge = graph.edge(e);
        const Vector v = encoder.embed(edge.relation);
        std::copy(v.begin(), v.end(), edges.row(e).begin());
        endpoints.emplace_back(edge.head, edge.tail);
    }
    return EncodedGraph(std::move(nodes), std::move(edges), std::move(endpoints));
}

GatParams GatParams::zeros(std::size_t d_in, std::size_t d_out, std::size_t heads, double leaky_slope) {
    GatParams p;
    p.leaky_slope = leaky_slope;
    for (std::size_t h = 0; h < heads; ++h) {
        p.heads.push_back({Matrix(d_out, d_in), Matrix(d_out, d_in), Vector(2 * d_out, 0.0), Vector(2 * d_out, 0.0)});
    }
    return p;
}

GatParams GatParams::random(std::size_t d_in, std::size_t d_out, std::size_t heads, double scale,
                            std::mt19937_64& rng, double leaky_slope) {
    GatParams p = zeros(d_in, d_out, heads, leaky_slope);
    for (auto t : p.tensors()) {
        for (double& x : t) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            x = (2.0 * u - 1.0) * scale;
        }
    }
    return p;
}

void GatParams::validate() const {
    if (heads.empty()) throw std::invalid_argument("GatParams: at least one head required");
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw std::invalid_argument("GatParams: leaky slope must lie in (0, 1)");
    const std::size_t din = d_in();
    const std::size_t dout = d_out();
    for (const auto& h : heads) {
        if (h.w_node.rows() != dout || h.w_node.cols() != din || h.w_edge.rows() != dout || h.w_edge.cols() != din ||
            h.a_node.size() != 2 * dout || h.a_edge.size() != 2 * dout) {
            throw std::invalid_argument("GatParams: inconsistent head shapes");
        }
    }
    for (auto t : tensors()) {
        for (double x : t) {
            if (!std::isfinite(x)) throw std::invalid_argument("GatParams: non-finite entry");
        }
    }
}

std::vector<std::span<double>> GatParams::tensors() {
    std::vector<std::span<double>> out;
    for (auto& h : heads) {
        out.emplace_back(h.w_node.flat());
        out.emplace_back(h.w_edge.flat());
        out.emplace_back(h.a_node);
        out.emplace_back(h.a_edge);
    }
    return out;
}

std::vector<std::span<const double>> GatParams::tensors() const {
    std::vector<std::span<const double>> out;
    for (const auto& h : heads) {
        out.emplace_back(h.w_node.flat());
        out.emplace_back(h.w_edge.flat());
        out.emplace_back(h.a_node);
        out.emplace_back(h.a_edge);
    }
    return out;
}

double leaky_relu(double x, double slope) noexcept { return x > 0.0 ? x : slope * x; }

std::span<const double> GatForward::edge_attention(const EncodedGraph& g, std::size_t head, std::size_t node) const {
    return {heads.at(head).edge_attn.data() + g.incident_offset(node), g.incident_edges(node).size()};
}

std::span<const double> GatForward::node_attention(const EncodedGraph& g, std::size_t head, std::size_t node) const {
    return {heads.at(head).node_attn.data() + g.neighbor_offset(node), g.neighbors(node).size()};
}

namespace {

// Softmax over leaky(self + other[k]). The shared self term is cancelled
// exactly between entries on the same branch.
void attend(double self_term, std::span<const double> other, double slope, std::span<double> pre,
            std::span<double> out) {
    std::size_t top = 0;
    double best = 0.0;
    for (std::size_t k = 0; k < other.size(); ++k) {
        pre[k] = self_term + other[k];
        const double v = leaky_relu(pre[k], slope);
        if (k == 0 || v > best) {
            best = v;
            top = k;
        }
    }
    const auto branch = [&](std::size_t k) { return pre[k] > 0.0 ? 1.0 : slope; };
    const double s_top = branch(top);
    double sum = 0.0;
    for (std::size_t k = 0; k < other.size(); ++k) {
        const double s = branch(k);
        const double shifted = (s - s_top) * self_term + (s * other[k] - s_top * other[top]);
        out[k] = std::exp(shifted);
        sum += out[k];
    }
    for (double& x : out) x /= sum;
}

void check_dims(const EncodedGraph& g, const GatParams& p) {
    if (p.heads.empty()) throw std::invalid_argument("gat: no attention heads");
    if (g.node_count() > 0 && g.dim() != p.d_in()) {
        throw std::invalid_argument("gat: feature width " + std::to_string(g.dim()) + " does not match d_in " +
                                    std::to_string(p.d_in()));
    }
}

}  // namespace

GatForward gat_forward(const EncodedGraph& g, const GatParams& p) {
    check_dims(g, p);
    const std::size_t n = g.node_count();
    const std::size_t d = p.d_out();
    const double inv_heads = 1.0 / static_cast<double>(p.head_count());
    GatForward fwd;
    fwd.output = Matrix(n, d);
    fwd.heads.resize(p.head_count());
    Vector acc(d);
    std::vector<double> logits;
    for (std::size_t h = 0; h < p.head_count(); ++h) {
        const GatHead& head = p.heads[h];
        GatHeadCache& c = fwd.heads[h];
        c.node_proj = n > 0 ? transform_rows(head.w_node, g.nodes()) : Matrix(0, d);
        c.edge_proj = g.edge_count() > 0 ? transform_rows(head.w_edge, g.edges()) : Matrix(0, d);
        c.edge_pre.resize(g.incidence_count());
        c.edge_attn.resize(g.incidence_count());
        c.node_pre.resize(g.neighbor_pair_count());
        c.node_attn.resize(g.neighbor_pair_count());
        const std::span<const double> a_edge_self(head.a_edge.data(), d);
        const std::span<const double> a_edge_other(head.a_edge.data() + d, d);
        const std::span<const double> a_node_self(head.a_node.data(), d);
        const std::span<const double> a_node_other(head.a_node.data() + d, d);

        for (std::size_t i = 0; i < n; ++i) {
            std::fill(acc.begin(), acc.end(), 0.0);
            const auto self = c.node_proj.row(i);

            const auto edges = g.incident_edges(i);
            if (!edges.empty()) {
                const std::size_t base = g.incident_offset(i);
                const double self_term = kernels::dot(a_edge_self, self);
                logits.resize(edges.size());
                for (std::size_t k = 0; k < edges.size(); ++k)
                    logits[k] = kernels::dot(a_edge_other, c.edge_proj.row(edges[k]));
                std::span<double> attn(c.edge_attn.data() + base, edges.size());
                attend(self_term, logits, p.leaky_slope, std::span<double>(c.edge_pre.data() + base, edges.size()), attn);
                for (std::size_t k = 0; k < edges.size(); ++k) kernels::axpy(attn[k], c.edge_proj.row(edges[k]), acc);
            }

            const auto nbrs = g.neighbors(i);
            if (!nbrs.empty()) {
                const std::size_t base = g.neighbor_offset(i);
                const double self_term = kernels::dot(a_node_self, self);
                logits.resize(nbrs.size());
                for (std::size_t k = 0; k < nbrs.size(); ++k)
                    logits[k] = kernels::dot(a_node_other, c.node_proj.row(nbrs[k]));
                std::span<double> attn(c.node_attn.data() + base, nbrs.size());
                attend(self_term, logits, p.leaky_slope, std::span<double>(c.node_pre.data() + base, nbrs.size()), attn);
                for (std::size_t k = 0; k < nbrs.size(); ++k) kernels::axpy(attn[k], c.node_proj.row(nbrs[k]), acc);
            }

            kernels::axpy(inv_heads, acc, fwd.output.row(i));
        }
    }
    return fwd;
}

void gat_backward(const EncodedGraph& g, const GatParams& p, const GatForward& fwd, const Matrix& upstream,
                  GatParams& grad, Matrix* d_nodes, Matrix* d_edges) {
    check_dims(g, p);
    const std::size_t n = g.node_count();
    const std::size_t m = g.edge_count();
    const std::size_t d = p.d_out();
    if (upstream.rows() != n || (n > 0 && upstream.cols() != d)) throw std::invalid_argument("gat_backward: upstream shape");
    if (grad.head_count() != p.head_count()) throw std::invalid_argument("gat_backward: gradient shape");
    const double inv_heads = 1.0 / static_cast<double>(p.head_count());

    Vector gi(d);
    std::vector<double> dattn;
    for (std::size_t h = 0; h < p.head_count(); ++h) {
        const GatHead& head = p.heads[h];
        const GatHeadCache& c = fwd.heads[h];
        GatHead& gh = grad.heads[h];
        Matrix d_node_proj(n, d);
        Matrix d_edge_proj(m, d);
        const std::span<const double> a_edge_self(head.a_edge.data(), d);
        const std::span<const double> a_edge_other(head.a_edge.data() + d, d);
        const std::span<const double> a_node_self(head.a_node.data(), d);
        const std::span<const double> a_node_other(head.a_node.data() + d, d);
        std::span<double> ga_edge_self(gh.a_edge.data(), d);
        std::span<double> ga_edge_other(gh.a_edge.data() + d, d);
        std::span<double> ga_node_self(gh.a_node.data(), d);
        std::span<double> ga_node_other(gh.a_node.data() + d, d);

        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < d; ++k) gi[k] = upstream(i, k) * inv_heads;
            const auto self = c.node_proj.row(i);

            const auto edges = g.incident_edges(i);
            if (!edges.empty()) {
                const std::size_t base = g.incident_offset(i);
                const std::span<const double> attn(c.edge_attn.data() + base, edges.size());
                dattn.resize(edges.size());
                double weighted = 0.0;
                for (std::size_t k = 0; k < edges.size(); ++k) {
                    dattn[k] = kernels::dot(gi, c.edge_proj.row(edges[k]));
                    weighted += attn[k] * dattn[k];
                    kernels::axpy(attn[k], gi, d_edge_proj.row(edges[k]));
                }
                double d_self = 0.0;
                for (std::size_t k = 0; k < edges.size(); ++k) {
                    const double dlogit = attn[k] * (dattn[k] - weighted);
                    const double dz = c.edge_pre[base + k] > 0.0 ? dlogit : p.leaky_slope * dlogit;
                    if (dz == 0.0) continue;
                    d_self += dz;
                    kernels::axpy(dz, c.edge_proj.row(edges[k]), ga_edge_other);
                    kernels::axpy(dz, a_edge_other, d_edge_proj.row(edges[k]));
                }
                if (d_self != 0.0) {
                    kernels::axpy(d_self, self, ga_edge_self);
                    kernels::axpy(d_self, a_edge_self, d_node_proj.row(i));
                }
            }

            const auto nbrs = g.neighbors(i);
            if (!nbrs.empty()) {
                const std::size_t base = g.neighbor_offset(i);
                const std::span<const double> attn(c.node_attn.data() + base, nbrs.size());
                dattn.resize(nbrs.size());
                double weighted = 0.0;
                for (std::size_t k = 0; k < nbrs.size(); ++k) {
                    dattn[k] = kernels::dot(gi, c.node_proj.row(nbrs[k]));
                    weighted += attn[k] * dattn[k];
                    kernels::axpy(attn[k], gi, d_node_proj.row(nbrs[k]));
                }
                double d_self = 0.0;
                for (std::size_t k = 0; k < nbrs.size(); ++k) {
                    const double dlogit = attn[k] * (dattn[k] - weighted);
                    const double dz = c.node_pre[base + k] > 0.0 ? dlogit : p.leaky_slope * dlogit;
                    if (dz == 0.0) continue;
                    d_self += dz;
                    kernels::axpy(dz, c.node_proj.row(nbrs[k]), ga_node_other);
                    kernels::axpy(dz, a_node_other, d_node_proj.row(nbrs[k]));
                }
                if (d_self != 0.0) {
                    kernels::axpy(d_self, self, ga_node_self);
                    kernels::axpy(d_self, a_node_self, d_node_proj.row(i));
                }
            }
        }

        // projections: node_proj.row(i) = W_N x_i, edge_proj.row(j) = W_E y_j
        for (std::size_t i = 0; i < n; ++i) {
            outer_acc(d_node_proj.row(i), g.nodes().row(i), gh.w_node);
            if (d_nodes != nullptr) matvec_t_acc(head.w_node, d_node_proj.row(i), d_nodes->row(i));
        }
        for (std::size_t j = 0; j < m; ++j) {
            outer_acc(d_edge_proj.row(j), g.edges().row(j), gh.w_edge);
            if (d_edges != nullptr) matvec_t_acc(head.w_edge, d_edge_proj.row(j), d_edges->row(j));
        }
    }
}

}  // namespace graf
