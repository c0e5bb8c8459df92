#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "goaltm/corpus.hpp"

namespace goaltm {

// Settings for a synthetic corpus with a known cluster structure. Token names
// follow the convention PlantedEmbedding understands (c<cluster><suffix>), so
// the embedding geometry matches the generation labels and end-to-end recovery
// can be scored exactly.
struct PlantedSpec {
    int documents = 60;
    int clusters = 3;
    int tokens_per_doc = 12;
    int pool_words = 15;        // distinct content words per cluster
    int phrases_per_cluster = 5;
    int goals_per_doc = 3;
    int embedding_dim = 16;
    uint64_t seed = 0;
};

struct PlantedWorld {
    Corpus corpus;
    std::vector<int> cluster_of;           // ground-truth cluster per document
    std::string fixture_json;              // canned provider responses + embedding choice
    std::vector<std::string> truth_goals;  // one reference phrase per cluster
};

PlantedWorld make_planted_world(const PlantedSpec& spec);

} // namespace goaltm
