#include "goaltm/planted.hpp"

#include <random>

#include <json.hpp>

#include "goaltm/errors.hpp"

using json = nlohmann::json;

namespace goaltm {

namespace {

std::string cluster_word(int cluster, int word) {
    return "c" + std::to_string(cluster) + "w" + std::to_string(word);
}

std::string cluster_phrase(int cluster, int idx) {
    std::string c = std::to_string(cluster);
    std::string i = std::to_string(idx);
    return "c" + c + "goal" + i + " c" + c + "note" + i;
}

std::string sample_text(int cluster, const PlantedSpec& spec, std::mt19937_64& rng) {
    std::string text;
    for (int t = 0; t < spec.tokens_per_doc; ++t) {
        if (!text.empty()) text += ' ';
        text += cluster_word(cluster, static_cast<int>(rng() % spec.pool_words));
    }
    return text;
}

} // namespace

PlantedWorld make_planted_world(const PlantedSpec& spec) {
    if (spec.documents < 1 || spec.clusters < 1 || spec.tokens_per_doc < 1 ||
        spec.pool_words < 1 || spec.embedding_dim < 2)
        throw DomainError("planted corpus: counts must be positive");
    if (spec.goals_per_doc < 3 || spec.goals_per_doc > 5 ||
        spec.phrases_per_cluster < spec.goals_per_doc)
        throw DomainError("planted corpus: each document needs 3..5 phrases drawn from its pool");
    if (spec.clusters > spec.embedding_dim)
        throw DomainError("planted corpus: more clusters than embedding axes");

    std::mt19937_64 rng(spec.seed);
    PlantedWorld world;
    json goals_map = json::object();
    json augment_map = json::object();

    for (int i = 0; i < spec.documents; ++i) {
        int cluster = i % spec.clusters;
        Document doc;
        doc.id = "doc" + std::to_string(i);
        doc.raw_text = sample_text(cluster, spec, rng);
        doc.tokens = tokenize_fallback(doc.raw_text);
        world.corpus.documents.push_back(doc);
        world.cluster_of.push_back(cluster);

        // Pick goals_per_doc distinct phrases from this cluster's pool.
        std::vector<int> idx(spec.phrases_per_cluster);
        for (size_t j = 0; j < idx.size(); ++j) idx[j] = static_cast<int>(j);
        for (size_t j = idx.size() - 1; j > 0; --j)
            std::swap(idx[j], idx[rng() % (j + 1)]);
        std::string phrase_list;
        for (int g = 0; g < spec.goals_per_doc; ++g) {
            if (!phrase_list.empty()) phrase_list += "; ";
            phrase_list += cluster_phrase(cluster, idx[g]);
        }
        goals_map[doc.id] = phrase_list;

        // Two fresh draws from the same pool stand in for paraphrases.
        augment_map[doc.id] = json::array({sample_text(cluster, spec, rng),
                                           sample_text(cluster, spec, rng)});
    }

    for (int k = 0; k < spec.clusters; ++k) world.truth_goals.push_back(cluster_phrase(k, 0));

    json fixture{{"goals", goals_map},
                 {"augment", augment_map},
                 {"augment_mode", "strict"},
                 {"embedding",
                  {{"kind", "planted"}, {"dim", spec.embedding_dim}, {"seed", spec.seed}}}};
    world.fixture_json = fixture.dump(2) + "\n";
    return world;
}

} // namespace goaltm
