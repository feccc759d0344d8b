#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "graf/embedding.hpp"
#include "support.hpp"

using namespace graf;
using namespace graf::testing;

TEST_CASE("relevance matrix") {
    Matrix a(1, 2);
    a(0, 0) = 1; a(0, 1) = 2;
    const Matrix r = relevance_matrix(a, a);
    CHECK(r.rows() == 1);
    CHECK(r(0, 0) == doctest::Approx(1.0));

    std::mt19937_64 rng(1);
    const Matrix c = random_matrix(2, 4, rng), k = random_matrix(3, 4, rng);
    const Matrix rr = relevance_matrix(c, k);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            double dot = 0, nc = 0, nk = 0;
            for (std::size_t t = 0; t < 4; ++t) {
                dot += c(i, t) * k(j, t);
                nc += c(i, t) * c(i, t);
                nk += k(j, t) * k(j, t);
            }
            CHECK(rr(i, j) == doctest::Approx(dot / std::sqrt(nc * nk)).epsilon(1e-12));
            CHECK(std::abs(rr(i, j)) <= 1.0);
        }
    }
    Matrix scaled = k;
    for (double& x : scaled.flat()) x *= 3.5;
    const Matrix rs = relevance_matrix(c, scaled);
    for (std::size_t i = 0; i < rs.size(); ++i) CHECK(rs.flat()[i] == doctest::Approx(rr.flat()[i]).epsilon(1e-14));
}

TEST_CASE("aggregation") {
    Matrix kg(2, 2);
    kg(0, 0) = 1; kg(0, 1) = 2; kg(1, 0) = 3; kg(1, 1) = 4;
    Matrix zero(2, 2);
    const Matrix h0 = aggregate_claims(zero, kg);
    for (double v : h0.flat()) CHECK(v == 0.0);
    Matrix eye(2, 2);
    eye(0, 0) = eye(1, 1) = 1;
    CHECK(aggregate_claims(eye, kg) == kg);
    Matrix r(2, 2);
    r(0, 0) = 0.5; r(0, 1) = -1; r(1, 0) = 2; r(1, 1) = 0.25;
    const Matrix h = aggregate_claims(r, kg);
    CHECK(h(0, 0) == doctest::Approx(0.5 * 1 - 1 * 3));
    CHECK(h(0, 1) == doctest::Approx(0.5 * 2 - 1 * 4));
    CHECK(h(1, 0) == doctest::Approx(2 * 1 + 0.25 * 3));
    CHECK(h(1, 1) == doctest::Approx(2 * 2 + 0.25 * 4));
}

TEST_CASE("self attention") {
    std::mt19937_64 rng(2);
    ScorerParams p = ScorerParams::random(4, 1.0, rng);
    const Matrix one = random_matrix(1, 4, rng);
    auto out = self_attention(one, p);
    CHECK(out.attention(0, 0) == 1.0);
    const Vector wv = matvec(p.w_value, one.row(0));
    for (std::size_t k = 0; k < 4; ++k) CHECK(out.output(0, k) == doctest::Approx(wv[k]));

    p.w_query.fill(0.0);
    p.w_key.fill(0.0);
    const Matrix seq = random_matrix(3, 4, rng);
    out = self_attention(seq, p);
    Vector mean(4, 0.0);
    for (std::size_t s = 0; s < 3; ++s) {
        const Vector v = matvec(p.w_value, seq.row(s));
        for (std::size_t k = 0; k < 4; ++k) mean[k] += v[k] / 3.0;
    }
    for (std::size_t t = 0; t < 3; ++t) {
        for (std::size_t k = 0; k < 4; ++k) CHECK(out.output(t, k) == doctest::Approx(mean[k]).epsilon(1e-12));
        for (std::size_t s = 0; s < 3; ++s) CHECK(out.attention(t, s) == doctest::Approx(1.0 / 3.0));
    }

    for (int trial = 0; trial < 50; ++trial) {
        const ScorerParams q = ScorerParams::random(4, 3.0, rng);
        const auto o = self_attention(random_matrix(1 + rng() % 6, 4, rng), q);
        for (std::size_t t = 0; t < o.attention.rows(); ++t) {
            const auto row = o.attention.row(t);
            CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("sigmoid is stable") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(-800.0) == 0.0);
    CHECK(sigmoid(-30.0) > 0.0);
    CHECK(sigmoid(2.0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
}

TEST_CASE("scoring") {
    std::mt19937_64 rng(3);
    const auto in = random_choice(6, rng);
    Model m = random_model(6, 2, rng);
    const auto t1 = score_forward(in, m);
    CHECK(t1.probability > 0.0);
    CHECK(t1.probability < 1.0);
    CHECK(score_forward(in, m).probability == t1.probability);
    CHECK(t1.sequence.rows() == 1 + in.claims.node_count());
    std::fill(m.scorer.w_final.begin(), m.scorer.w_final.end(), 0.0);
    CHECK(score_forward(in, m).probability == 0.5);

    PreparedChoice bare = in;
    bare.subgraph = EncodedGraph();
    const auto tb = score_forward(bare, random_model(6, 2, rng));
    for (std::size_t r = 1; r < tb.sequence.rows(); ++r)
        for (double v : tb.sequence.row(r)) CHECK(v == 0.0);
}

TEST_CASE("pipeline on a three-node graph") {
    const auto kg = build_graph(std::vector<Triplet>{{"court", "has", "clerk"}, {"clerk", "files", "appeal"}});
    const SubgraphSampler sampler(kg);
    const StubClaimExtractor ex;
    const HashEncoder enc(16, 7);
    const Pipeline pipe(ex, &sampler, enc);
    MCQAItem item;
    item.id = "q";
    item.question = "Who files?";
    item.choices = {{"A", "(clerk;files;appeal)"}, {"B", "(judge;files;motion)"}, {"C", "nobody"}};
    item.targets = {"A"};
    const Model m = Model::random(16, 2, 7);
    const auto a1 = score_choice(item, "A", pipe, m);
    const auto a2 = score_choice(item, "A", pipe, m);
    CHECK(a1.probability == a2.probability);
    CHECK(a1.claim_edges == 1);
    CHECK(a1.subgraph_entities > 0);
    const auto c = score_choice(item, "C", pipe, m);
    CHECK(c.empty_claims);

    const NullClaimExtractor none;
    const Pipeline no_claims(none, &sampler, enc, {false, true});
    CHECK(no_claims.prepare(item, "A").claims.node_count() == 0);
    const Pipeline no_kg(ex, nullptr, enc, {true, false});
    CHECK(no_kg.prepare(item, "A").subgraph.node_count() == 0);
    CHECK(score_choice(item, "A", no_kg, m).empty_subgraph);
}

TEST_CASE("answer selection") {
    CHECK(select_answers({{"A", 0.9}, {"B", 0.2}, {"C", 0.1}}, 1) == LabelSet{"A"});
    CHECK(select_answers({{"A", 0.9}, {"B", 0.2}, {"C", 0.1}}, 3) == LabelSet{"A", "B", "C"});
    CHECK(select_answers({{"A", 0.8}, {"B", 0.7}, {"C", 0.6}}, 2) == LabelSet{"A", "B"});
    CHECK(select_answers({{"A", 0.5}, {"B", 0.5}, {"C", 0.5}}, 1) == LabelSet{"A"});
    CHECK(select_answers({{"A", 0.1}, {"B", 0.3}, {"C", 0.2}}, std::nullopt) == LabelSet{"B"});
    CHECK(select_answers({{"A", 0.9}, {"B", 0.6}, {"C", 0.7}}, std::nullopt) == LabelSet{"A", "C"});
    CHECK_THROWS(select_answers({{"A", 0.9}}, 0));
    CHECK_THROWS(select_answers({{"A", 0.9}}, 2));

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 300; ++trial) {
        std::map<Label, double> s{{"A", u(rng)}, {"B", u(rng)}, {"C", u(rng)}};
        const std::size_t k = 1 + rng() % 3;
        const auto before = select_answers(s, k);
        for (const auto& l : before) {
            auto raised = s;
            raised[l] = std::min(1.0, raised[l] + u(rng));
            CHECK(select_answers(raised, k).contains(l));
        }
    }
}

TEST_CASE("model flatten and assign") {
    Model m = Model::random(5, 3, 11);
    const Vector flat = m.flatten();
    CHECK(flat.size() == m.parameter_count());
    Model z = Model::zeros(5, 3);
    z.assign(flat);
    CHECK(z.flatten() == flat);
    CHECK_THROWS(z.assign(Vector(3, 0.0)));
    CHECK(Model::random(5, 3, 11).flatten() == flat);
    CHECK(Model::random(5, 3, 12).flatten() != flat);
}
