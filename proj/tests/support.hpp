#pragma once

// Random fixtures shared by the unit tests and the acceptance suite.

#include <cmath>
#include <random>
#include <vector>

#include "graf/gat.hpp"
#include "graf/scorer.hpp"
#include "graf/training.hpp"

namespace graf::testing {

inline double gaussian(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return n(rng);
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    Matrix m(rows, cols);
    for (double& x : m.flat()) x = gaussian(rng);
    return m;
}

/// Connected graph: a random spanning tree plus `extra` random edges (self
/// loops allowed when `loops`).
inline EncodedGraph random_graph(std::size_t n, std::size_t extra, std::size_t d, std::mt19937_64& rng,
                                 bool loops = false) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> ends;
    for (std::uint32_t v = 1; v < n; ++v) {
        const auto u = static_cast<std::uint32_t>(rng() % v);
        if (rng() % 2) ends.emplace_back(u, v); else ends.emplace_back(v, u);
    }
    for (std::size_t e = 0; e < extra; ++e) {
        const auto a = static_cast<std::uint32_t>(rng() % n);
        auto b = static_cast<std::uint32_t>(rng() % n);
        if (!loops && a == b) b = static_cast<std::uint32_t>((b + 1) % n);
        if (a == b && !loops) continue;
        ends.emplace_back(a, b);
    }
    Matrix nodes = random_matrix(n, d, rng);
    Matrix edges = random_matrix(ends.size(), d, rng);
    return EncodedGraph(std::move(nodes), std::move(edges), std::move(ends));
}

inline Model random_model(std::size_t d, std::size_t heads, std::mt19937_64& rng, double scale = 1.0) {
    Model m = Model::zeros(d, heads);
    for (auto t : m.tensors())
        for (double& x : t) x = scale * gaussian(rng) / std::sqrt(static_cast<double>(d));
    return m;
}

inline double min_abs_preactivation(const GatForward& f) {
    double m = INFINITY;
    for (const auto& h : f.heads) {
        for (double v : h.edge_pre) m = std::min(m, std::abs(v));
        for (double v : h.node_pre) m = std::min(m, std::abs(v));
    }
    return m;
}

inline PreparedChoice random_choice(std::size_t d, std::mt19937_64& rng, std::size_t min_nodes = 3,
                                    std::size_t max_nodes = 8) {
    PreparedChoice c;
    c.label = "A";
    const std::size_t nc = min_nodes + rng() % (max_nodes - min_nodes + 1);
    const std::size_t nk = min_nodes + rng() % (max_nodes - min_nodes + 1);
    c.claims = random_graph(nc, rng() % 3, d, rng);
    c.subgraph = random_graph(nk, rng() % 4, d, rng);
    c.context.resize(d);
    for (double& x : c.context) x = gaussian(rng);
    return c;
}

/// Full scoring loss as a function of the flattened model, for grad_check.
inline LossWithGradient scoring_loss(const PreparedChoice& in, Model shape, bool target, LossKind kind) {
    return [&in, shape, target, kind](std::span<const double> theta, std::span<double> grad) mutable {
        shape.assign(theta);
        if (grad.empty()) return choice_loss(in, shape, target, kind, nullptr);
        Model g = Model::zeros(shape.dim(), shape.gat.head_count(), shape.gat.leaky_slope);
        const double l = choice_loss(in, shape, target, kind, &g);
        const Vector flat = g.flatten();
        std::copy(flat.begin(), flat.end(), grad.begin());
        return l;
    };
}

}  // namespace graf::testing
