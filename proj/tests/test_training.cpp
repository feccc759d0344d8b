#include "doctest.h"

#include <cmath>
#include <random>

#include "graf/embedding.hpp"
#include "graf/synthetic.hpp"
#include "support.hpp"

using namespace graf;
using namespace graf::testing;

TEST_CASE("bce loss") {
    CHECK(bce_loss(1, 1.0 - 1e-12).value < 1e-11);
    CHECK(bce_loss(1, 0.5).value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(bce_loss(1, 0.5).grad == doctest::Approx(-2.0));
    CHECK(bce_loss(0, 0.5).grad == doctest::Approx(2.0));
    CHECK_THROWS(bce_loss(1, 0.0));
    CHECK_THROWS(bce_loss(1, 1.0));
    CHECK_THROWS(bce_loss(2, 0.5));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(1e-9, 1 - 1e-9);
    for (int i = 0; i < 200; ++i) {
        const double y = u(rng);
        CHECK(bce_loss(static_cast<int>(rng() % 2), y).value >= 0.0);
    }
}

TEST_CASE("cosine embedding loss") {
    CHECK(cosine_embedding_loss(1, 1.0).value == 0.0);
    CHECK(cosine_embedding_loss(-1, 0.0).value == 0.0);
    CHECK(cosine_embedding_loss(1, 0.0).value == 2.0);
    CHECK(cosine_embedding_loss(-1, -0.5).value == -1.0);   // kept as written
    CHECK(cosine_embedding_loss(1, 0.3).grad == -2.0);
    CHECK(cosine_embedding_loss(-1, 0.3).grad == 2.0);
    CHECK_THROWS(cosine_embedding_loss(0, 0.3));
}

TEST_CASE("grad_check basics") {
    const LossWithGradient quad = [](std::span<const double> t, std::span<double> g) {
        if (!g.empty()) g[0] = 2 * t[0];
        return t[0] * t[0];
    };
    const Vector theta{3.0};
    const auto r = grad_check(quad, theta, 1, 1e-5);
    CHECK(r.worst_analytic == 6.0);
    CHECK(std::abs(r.worst_numeric - 6.0) < 1e-8);
    CHECK(r.max_relative_error < 1e-8);

    const LossWithGradient zero = [](std::span<const double>, std::span<double> g) {
        for (double& x : g) x = 0;
        return 0.0;
    };
    const auto z = grad_check(zero, Vector(4, 1.0), 10, 1e-5);
    CHECK(z.max_relative_error == 0.0);
    CHECK(z.checked == 4);

    const LossWithGradient wrong = [](std::span<const double> t, std::span<double> g) {
        if (!g.empty()) g[0] = 3 * t[0];
        return t[0] * t[0];
    };
    CHECK(grad_check(wrong, theta, 1, 1e-5).max_relative_error > 0.3);
}

TEST_CASE("full scoring loss matches finite differences") {
    std::mt19937_64 rng(2);
    int fixtures = 0;
    while (fixtures < 3) {
        const std::size_t d = 3;
        const auto in = random_choice(d, rng, 4, 4);
        const Model m = random_model(d, 2, rng);
        const auto tr = score_forward(in, m);
        if (std::min(min_abs_preactivation(tr.claim_gat), min_abs_preactivation(tr.kg_gat)) < 1e-3) continue;
        for (LossKind kind : {LossKind::bce, LossKind::cosine}) {
            const auto r = grad_check(scoring_loss(in, m, fixtures % 2 == 0, kind), m.flatten(), 1'000'000, 1e-5);
            CAPTURE(r.worst_index);
            CAPTURE(r.worst_analytic);
            CAPTURE(r.worst_numeric);
            CHECK(r.max_relative_error < 1e-4);
        }
        ++fixtures;
    }
}

TEST_CASE("adamw") {
    AdamWConfig cfg;
    cfg.learning_rate = 0.0;
    AdamW opt(3, cfg);
    Vector p{1.0, -2.0, 0.5};
    const Vector before = p;
    opt.step(p, Vector{0.3, -0.1, 5.0});
    CHECK(p == before);
    CHECK(opt.steps() == 1);

    // one step from zero moments: p -= lr * (wd p + g / (|g| + eps)) to first order
    cfg.learning_rate = 0.1;
    cfg.weight_decay = 0.0;
    AdamW opt2(1, cfg);
    Vector q{1.0};
    opt2.step(q, Vector{4.0});
    CHECK(q[0] == doctest::Approx(1.0 - 0.1 * 4.0 / (4.0 + 1e-8)).epsilon(1e-12));
    CHECK_THROWS(opt2.step(q, Vector{1.0, 2.0}));

    cfg.weight_decay = 0.5;
    AdamW opt3(1, cfg);
    Vector w{2.0};
    opt3.step(w, Vector{0.0});
    CHECK(w[0] == doctest::Approx(2.0 - 0.1 * 0.5 * 2.0));
}

TEST_CASE("train config rules") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.learning_rate = 0.0;
    CHECK_THROWS(c.validate());
    c = TrainConfig{};
    c.epochs = 0;
    CHECK_THROWS(c.validate());
    CHECK(parse_loss_kind("cosine") == LossKind::cosine);
    CHECK_THROWS(parse_loss_kind("mse"));
}

TEST_CASE("training bookkeeping and determinism") {
    const auto kg = build_graph(std::vector<Triplet>{{"court", "has", "clerk"}, {"clerk", "files", "appeal"}});
    const SubgraphSampler sampler(kg);
    const StubClaimExtractor ex;
    const HashEncoder enc(8, 0);
    const Pipeline pipe(ex, &sampler, enc);
    MCQAItem item;
    item.id = "q1";
    item.question = "Which holds?";
    item.choices = {{"A", "(court;has;clerk)"}, {"B", "(court;has;judge)"}, {"C", "(clerk;files;motion)"}};
    item.targets = {"A"};
    TrainConfig cfg;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.epochs = 1;
    cfg.learning_rate = 1e-2;
    const auto r = train({item}, {}, pipe, cfg);
    REQUIRE(r.log.size() == 1);
    CHECK(r.log[0].loss_evaluations == 3);
    CHECK(std::isfinite(r.log[0].mean_loss));
    CHECK(std::isnan(r.log[0].validation_accuracy));

    cfg.epochs = 5;
    std::size_t calls = 0, saves = 0;
    cfg.checkpoint_every = 2;
    TrainCallbacks cb;
    cb.on_epoch = [&](const EpochLog&) { ++calls; };
    cb.on_checkpoint = [&](std::size_t, const Model&) { ++saves; };
    const auto a = train({item}, {item}, pipe, cfg, cb);
    const auto b = train({item}, {item}, pipe, cfg);
    CHECK(calls == 5);
    CHECK(saves == 2);
    CHECK(a.last.flatten() == b.last.flatten());
    CHECK(a.best_epoch == b.best_epoch);

    cfg.dim = 16;
    CHECK_THROWS(train({item}, {}, pipe, cfg));
}

TEST_CASE("overfitting the synthetic exam") {
    SyntheticConfig sc;
    sc.train_items = 8;
    sc.heldout_items = 0;
    const auto fx = make_synthetic_fixture(sc);
    const SubgraphSampler sampler(fx.kg);
    const StubClaimExtractor ex;
    const HashEncoder enc(16, 0);
    const Pipeline pipe(ex, &sampler, enc);
    TrainConfig cfg;
    cfg.dim = 16;
    cfg.heads = 2;
    cfg.epochs = 200;
    cfg.learning_rate = 1e-2;
    cfg.stop_at_train_accuracy = 1.0;
    const auto r = train(fx.train, {}, pipe, cfg);
    for (const auto& e : r.log) CHECK(std::isfinite(e.mean_loss));
    const auto items = prepare_items(fx.train, pipe);
    CHECK(prepared_accuracy(items, r.best) >= 0.95);
}

TEST_CASE("synthetic fixture structure") {
    const auto fx = make_synthetic_fixture();
    CHECK(fx.train.size() == 20);
    CHECK(fx.heldout.size() == 10);
    for (const auto* part : {&fx.train, &fx.heldout}) {
        for (const auto& it : *part) {
            std::size_t claims = 0;
            for (const auto& c : it.choices) {
                const auto g = stub_extract(c.text);
                if (claims == 0) claims = g.edge_count();
                CHECK(g.edge_count() == claims);
                for (const auto& t : g.triplets()) {
                    const auto h = fx.kg.find(t.head);
                    const auto tl = fx.kg.find(t.tail);
                    bool present = false;
                    if (h && tl) {
                        for (const auto& inc : fx.kg.incident(*h)) {
                            const auto& e = fx.kg.edge(inc.edge);
                            present = present || (e.head == *h && e.tail == *tl && e.relation == t.relation);
                        }
                    }
                    CHECK(present == it.is_target(c.label));
                }
            }
        }
    }
}
