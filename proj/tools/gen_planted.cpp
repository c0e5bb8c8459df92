// Writes a synthetic corpus with known cluster structure plus the fixture,
// config, and reference-goal files needed to run the full pipeline offline.
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "goaltm/io.hpp"
#include "goaltm/planted.hpp"
#include "goaltm/train.hpp"

using goaltm::PlantedSpec;

int main(int argc, char** argv) {
    CLI::App app{"generate a planted-cluster demo corpus"};
    std::string out_dir;
    PlantedSpec spec;
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--seed", spec.seed, "generation seed");
    app.add_option("--docs", spec.documents, "document count");
    app.add_option("--clusters", spec.clusters, "planted cluster count");
    app.add_option("--dim", spec.embedding_dim, "planted embedding width");
    CLI11_PARSE(app, argc, argv);

    try {
        goaltm::PlantedWorld world = goaltm::make_planted_world(spec);
        std::filesystem::create_directories(out_dir);
        auto path = [&](const char* name) {
            return (std::filesystem::path(out_dir) / name).string();
        };

        goaltm::save_corpus(world.corpus, path("corpus.jsonl"));
        goaltm::atomic_write_bytes(path("fixture.json"), world.fixture_json);
        goaltm::atomic_write_bytes(path("truth.json"),
                                   nlohmann::json{{"goals", world.truth_goals}}.dump(2) + "\n");

        goaltm::TrainConfig config;
        config.topic_count = spec.clusters;
        config.batch_pairs = 8;
        config.epochs = 40;
        config.seed = spec.seed;
        config.min_count = 2;
        config.goal_text = "what each community is trying to achieve";
        goaltm::atomic_write_bytes(path("config.json"), goaltm::train_config_to_json(config));

        nlohmann::json summary{{"out", out_dir},
                               {"documents", world.corpus.documents.size()},
                               {"clusters", spec.clusters},
                               {"files", {"corpus.jsonl", "fixture.json", "truth.json",
                                          "config.json"}}};
        std::cout << summary.dump() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
