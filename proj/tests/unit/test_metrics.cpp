#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "goaltm/errors.hpp"
#include "goaltm/metrics.hpp"
#include "support/map_embedding.hpp"
#include "support/tmpdir.hpp"

using namespace goaltm;
using testsupport::MapEmbedding;
using testsupport::TempDir;

namespace {

TopicOutput topic_of(int id, std::vector<std::string> words, std::string summary = "") {
    TopicOutput t;
    t.topic_id = id;
    t.summary = std::move(summary);
    for (std::string& w : words) t.top.push_back({std::move(w), 0.0});
    return t;
}

Document doc_with(const std::string& id, const std::string& text) {
    Document d;
    d.id = id;
    d.raw_text = text;
    d.tokens = tokenize_fallback(text);
    return d;
}

} // namespace

TEST_CASE("ground truth goals parse and deduplicate") {
    GroundTruthGoals g = parse_ground_truth(R"({"goals": ["stay fit", "save money", "stay fit"]})");
    CHECK(g.goals == std::vector<std::string>{"stay fit", "save money"});

    CHECK_THROWS_AS(parse_ground_truth(R"({"goals": []})"), ValidationError);
    CHECK_THROWS_AS(parse_ground_truth(R"({"goals": [3]})"), ParseError);
    CHECK_THROWS_AS(parse_ground_truth(R"({"goals": [""]})"), ParseError);
    CHECK_THROWS_AS(parse_ground_truth(R"({"wrong": []})"), ParseError);
    CHECK_THROWS_AS(parse_ground_truth("nope"), ParseError);

    TempDir dir("truth");
    dir.write("truth.json", R"({"goals": ["one goal"]})");
    CHECK(load_ground_truth(dir.file("truth.json")).goals.size() == 1);
    CHECK_THROWS_AS(load_ground_truth(dir.file("absent.json")), MissingArtifactError);
}

TEST_CASE("unique term score counts distinct words") {
    std::vector<std::vector<std::string>> all_distinct;
    for (int k = 0; k < 20; ++k) {
        std::vector<std::string> words;
        for (int i = 0; i < 10; ++i) words.push_back("w" + std::to_string(k * 10 + i));
        all_distinct.push_back(words);
    }
    CHECK(unique_term_score(all_distinct) == 1.0);

    std::vector<std::string> base;
    for (int i = 0; i < 10; ++i) base.push_back("w" + std::to_string(i));
    CHECK(unique_term_score({base, base}) == doctest::Approx(0.5).epsilon(1e-12));

    // Second list shares exactly three words with the first.
    std::vector<std::string> overlap{"w0", "w1", "w2"};
    for (int i = 0; i < 7; ++i) overlap.push_back("x" + std::to_string(i));
    CHECK(unique_term_score({base, overlap}) == doctest::Approx(0.85).epsilon(1e-12));

    // Order inside a list never matters.
    std::vector<std::string> shuffled = overlap;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(unique_term_score({base, shuffled}) == unique_term_score({base, overlap}));

    CHECK_THROWS_AS(unique_term_score({{"just", "two"}}), DomainError);
    CHECK_THROWS_AS(unique_term_score({}), DomainError);
}

TEST_CASE("topic text renders either the word list or the summary") {
    TopicOutput t = topic_of(0, {"aa", "bb", "cc"}, "the summary phrase");
    CHECK(topic_text(t, TopicTextMode::TopWordsJoined) == "aa bb cc");
    CHECK(topic_text(t, TopicTextMode::Summary) == "the summary phrase");

    TopicOutput bare;
    CHECK_THROWS_AS(topic_text(bare, TopicTextMode::TopWordsJoined), DomainError);
    CHECK_THROWS_AS(topic_text(bare, TopicTextMode::Summary), DomainError);
}

TEST_CASE("goal similarity is one for perfectly matched texts") {
    FixtureHashEmbedding emb(10, 5);
    GroundTruthGoals truth{{"eat better food", "sleep more hours"}};
    std::vector<TopicOutput> topics{topic_of(0, {}, "eat better food"),
                                    topic_of(1, {}, "sleep more hours")};
    RelevanceScores scores = relevance_scores(topics, truth, TopicTextMode::Summary, emb);
    CHECK(goal_similarity(scores) == doctest::Approx(1.0).epsilon(1e-12));

    // An extra reference goal can only help.
    GroundTruthGoals wider = truth;
    wider.goals.push_back("run a marathon");
    RelevanceScores more = relevance_scores(topics, wider, TopicTextMode::Summary, emb);
    CHECK(goal_similarity(more) >= goal_similarity(scores) - 1e-15);
}

TEST_CASE("goal similarity of a single sixty degree pair is one half") {
    MapEmbedding emb(2, {{"left", {1.0, 0.0}},
                         {"slant", {0.5, std::sqrt(3.0) / 2.0}}});
    std::vector<TopicOutput> topics{topic_of(0, {}, "slant")};
    GroundTruthGoals truth{{"left"}};
    RelevanceScores scores = relevance_scores(topics, truth, TopicTextMode::Summary, emb);
    CHECK(goal_similarity(scores) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("relevance rates count strict threshold crossings") {
    RelevanceScores scores;
    scores.best_goal_for_topic = {0.9, 0.9, 0.9};
    scores.best_topic_for_goal = {0.6, 0.3, 0.7, 0.1};

    CHECK(goal_relevant_topic_rate(scores, 0.5) == 1.0);
    CHECK(goal_coverage_rate(scores, 0.5) == doctest::Approx(0.5).epsilon(1e-12));

    // Landing exactly on the threshold counts as a miss.
    CHECK(goal_relevant_topic_rate(scores, 0.9) == 0.0);
    CHECK(goal_coverage_rate(scores, 0.7) == 0.0);
    CHECK(goal_coverage_rate(scores, 0.65) == doctest::Approx(0.25).epsilon(1e-12));

    CHECK_THROWS_AS(goal_relevant_topic_rate(scores, 1.5), DomainError);
    CHECK_THROWS_AS(goal_similarity(RelevanceScores{}), DomainError);
}

TEST_CASE("relevance metrics match a brute force oracle") {
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 10; ++trial) {
        FixtureHashEmbedding emb(12, 100 + trial);
        int n_topics = 2 + static_cast<int>(rng() % 4);
        int n_goals = 2 + static_cast<int>(rng() % 5);
        std::vector<TopicOutput> topics;
        for (int t = 0; t < n_topics; ++t) {
            std::vector<std::string> words;
            for (int w = 0; w < 3; ++w) words.push_back("tok" + std::to_string(rng() % 40));
            topics.push_back(topic_of(t, words));
        }
        GroundTruthGoals truth;
        for (int g = 0; g < n_goals; ++g)
            truth.goals.push_back("goal" + std::to_string(rng() % 50) + " word" +
                                  std::to_string(g));

        RelevanceScores scores = relevance_scores(topics, truth, TopicTextMode::TopWordsJoined, emb);

        std::vector<double> best_topic(n_topics, -2.0);
        std::vector<double> best_goal(n_goals, -2.0);
        double gs_oracle = 0.0;
        for (int t = 0; t < n_topics; ++t) {
            Vec vt = embed_phrase(emb, topic_text(topics[t], TopicTextMode::TopWordsJoined));
            for (int g = 0; g < n_goals; ++g) {
                Vec vg = embed_phrase(emb, truth.goals[g]);
                double c = cosine(vt, vg);
                best_topic[t] = std::max(best_topic[t], c);
                best_goal[g] = std::max(best_goal[g], c);
            }
            gs_oracle += best_topic[t];
        }
        gs_oracle /= n_topics;

        CHECK(std::abs(goal_similarity(scores) - gs_oracle) <= 1e-9);
        double prev_gtr = 2.0;
        double prev_gcr = 2.0;
        for (double sigma : kRelevanceThresholds) {
            int above_t = 0;
            for (double c : best_topic)
                if (c > sigma) ++above_t;
            int above_g = 0;
            for (double c : best_goal)
                if (c > sigma) ++above_g;
            double gtr = goal_relevant_topic_rate(scores, sigma);
            double gcr = goal_coverage_rate(scores, sigma);
            CHECK(std::abs(gtr - static_cast<double>(above_t) / n_topics) <= 1e-9);
            CHECK(std::abs(gcr - static_cast<double>(above_g) / n_goals) <= 1e-9);
            CHECK(gtr <= prev_gtr + 1e-15);
            CHECK(gcr <= prev_gcr + 1e-15);
            prev_gtr = gtr;
            prev_gcr = gcr;
        }
    }
}

TEST_CASE("agreement coefficients follow the confusion counts") {
    std::vector<bool> a{true, true, false, false};
    std::vector<bool> b{true, false, true, false};
    AgreementScores s = agreement(a, b);
    CHECK(s.jaccard == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(s.simple_match == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.dice == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(s.degenerate);

    AgreementScores perfect = agreement(a, a);
    CHECK(perfect.jaccard == 1.0);
    CHECK(perfect.simple_match == 1.0);
    CHECK(perfect.dice == 1.0);
    CHECK_FALSE(perfect.degenerate);

    AgreementScores disjoint = agreement({true, false}, {false, true});
    CHECK(disjoint.jaccard == 0.0);
    CHECK(disjoint.dice == 0.0);
    CHECK(disjoint.simple_match == 0.0);

    AgreementScores nothing = agreement({false, false}, {false, false});
    CHECK(nothing.degenerate);
    CHECK(nothing.jaccard == 1.0);
    CHECK(nothing.dice == 1.0);
    CHECK(nothing.simple_match == 1.0);

    CHECK_THROWS_AS(agreement({true}, {true, false}), DomainError);
    CHECK_THROWS_AS(agreement({}, {}), DomainError);
}

TEST_CASE("annotation clustering groups phrases and picks member exemplars") {
    PlantedEmbedding emb(8, 6);
    std::vector<std::string> goal_set;
    for (int k = 0; k < 2; ++k)
        for (int t = 0; t < 3; ++t)
            goal_set.push_back("c" + std::to_string(k) + "goal" + std::to_string(t) + " c" +
                               std::to_string(k) + "note" + std::to_string(t));

    std::vector<AnnotationCluster> clusters = cluster_for_annotation(goal_set, 2, emb, 21);
    REQUIRE(clusters.size() == 2);
    size_t total = 0;
    for (const AnnotationCluster& c : clusters) {
        REQUIRE_FALSE(c.members.empty());
        total += c.members.size();
        CHECK(std::find(c.members.begin(), c.members.end(), c.exemplar) != c.members.end());
        // Planted phrases split cleanly, so a cluster never mixes tags.
        std::string tag = c.members.front().substr(0, 2);
        for (const std::string& m : c.members) CHECK(m.substr(0, 2) == tag);
    }
    CHECK(total == goal_set.size());

    // Exactly as many clusters as phrases: every cluster is its own exemplar.
    std::vector<AnnotationCluster> singletons =
        cluster_for_annotation({goal_set[0], goal_set[3]}, 2, emb, 3);
    for (const AnnotationCluster& c : singletons) {
        REQUIRE(c.members.size() == 1);
        CHECK(c.exemplar == c.members[0]);
    }

    CHECK(annotation_to_jsonl(cluster_for_annotation(goal_set, 2, emb, 21)) ==
          annotation_to_jsonl(clusters));

    std::string jsonl = annotation_to_jsonl(clusters);
    size_t lines = std::count(jsonl.begin(), jsonl.end(), '\n');
    CHECK(lines == 2);
    nlohmann::json first = nlohmann::json::parse(jsonl.substr(0, jsonl.find('\n')));
    CHECK(first["cluster"] == 0);
    CHECK(first.contains("exemplar"));
    CHECK(first["members"].is_array());

    CHECK_THROWS_AS(cluster_for_annotation({"lonely phrase"}, 2, emb, 1), DomainError);
    CHECK_THROWS_AS(cluster_for_annotation(goal_set, 0, emb, 1), DomainError);
}

TEST_CASE("coherence rewards co-occurring pairs and punishes disjoint ones") {
    Corpus corpus;
    corpus.documents = {doc_with("d1", "aa bb cc"), doc_with("d2", "aa bb dd"),
                        doc_with("d3", "ee ff")};
    CoherenceReport always = topic_coherence({{"aa", "bb"}}, corpus);
    REQUIRE(always.per_topic.size() == 1);
    CHECK(always.per_topic[0].npmi == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_FALSE(always.per_topic[0].has_out_of_vocab);
    CHECK_FALSE(always.comparable);

    // Frequencies crafted so the joint probability factorizes exactly.
    Corpus indep;
    indep.documents = {doc_with("d1", "xx yy"), doc_with("d2", "xx qq"), doc_with("d3", "yy qq"),
                       doc_with("d4", "zz qq")};
    CoherenceReport zero = topic_coherence({{"xx", "yy"}}, indep);
    CHECK(std::abs(zero.per_topic[0].npmi) <= 1e-9);
    CHECK(std::abs(zero.per_topic[0].uci) <= 1e-9);

    Corpus apart;
    apart.documents = {doc_with("d1", "aa cc"), doc_with("d2", "bb dd")};
    CoherenceReport never = topic_coherence({{"aa", "bb"}}, apart);
    CHECK(never.per_topic[0].npmi < -0.9);
    CHECK(never.per_topic[0].uci < -10.0);

    CoherenceReport oov = topic_coherence({{"aa", "ghost"}}, apart);
    CHECK(oov.per_topic[0].has_out_of_vocab);
    CHECK(std::isfinite(oov.per_topic[0].npmi));

    CHECK_THROWS_AS(topic_coherence({{"aa"}}, apart), DomainError);
    CHECK_THROWS_AS(topic_coherence({}, apart), DomainError);
    CHECK_THROWS_AS(topic_coherence({{"aa", "bb"}}, Corpus{}), DomainError);
}
