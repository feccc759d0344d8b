#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "graf/dataset.hpp"
#include "graf/kg.hpp"

namespace graf {

/// Toy exam whose correct choices state facts contained in the graph and
/// whose wrong choices state facts about entities the graph never mentions.
/// Question wording, relation names and claim counts are shared by all
/// choices, so only the graph lookup separates right from wrong.
struct SyntheticConfig {
    std::size_t train_items = 20;
    std::size_t heldout_items = 10;
    std::size_t claims_per_choice = 2;
    std::size_t extra_edges = 3;        // graph facts per question not used by any choice
    std::size_t double_answer_every = 4; // every n-th item has two targets (0 disables)
    std::size_t relation_count = 1;      // size of the shared relation vocabulary (1..5)
    std::uint64_t seed = 0;
};

struct SyntheticFixture {
    std::vector<MCQAItem> train;
    std::vector<MCQAItem> heldout;
    std::vector<Triplet> triplets;
    KnowledgeGraph kg;
};

SyntheticFixture make_synthetic_fixture(const SyntheticConfig& config = {});

}  // namespace graf
