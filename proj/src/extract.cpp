#include "goaltm/extract.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "goaltm/errors.hpp"
#include "goaltm/numeric.hpp"

using json = nlohmann::json;

namespace goaltm {

namespace {

// Softmax over the cosine of one occurrence embedding against every topic row.
Vec occurrence_scores(const Vec& embedding, const TopicMatrix& topics) {
    const int k = topics.weights.rows;
    Vec scores(k, 0.0);
    for (int t = 0; t < k; ++t) scores[t] = cosine(embedding, topics.weights.row_vec(t));
    return softmax(scores);
}

void check_topics(const TopicMatrix& topics) {
    if (topics.weights.rows < 1 || topics.weights.cols < 1)
        throw DomainError("extract: topic matrix is empty");
}

} // namespace

Vec word_topic_correlations(const std::string& word, const Corpus& corpus,
                            const OccurrenceIndex& index, EmbeddingProvider& embedder,
                            const TopicMatrix& topics) {
    check_topics(topics);
    const std::vector<OccurrenceRef>* refs = index.find(word);
    if (refs == nullptr || refs->empty())
        throw DomainError("extract: word '" + word + "' has no occurrences");

    Vec sum(topics.weights.rows, 0.0);
    int current_doc = -1;
    Mat doc_embeddings;
    for (const OccurrenceRef& ref : *refs) {
        if (ref.doc_index != current_doc) {
            current_doc = ref.doc_index;
            doc_embeddings = embedder.embed_tokens(corpus.documents[ref.doc_index].tokens);
        }
        Vec scores = occurrence_scores(doc_embeddings.row_vec(ref.token_pos), topics);
        for (size_t t = 0; t < sum.size(); ++t) sum[t] += scores[t];
    }
    for (double& v : sum) v /= static_cast<double>(refs->size());
    return sum;
}

TopicWordTable topic_word_distributions(const Corpus& corpus, const Vocabulary& vocab,
                                        const OccurrenceIndex& index,
                                        EmbeddingProvider& embedder, const TopicMatrix& topics) {
    check_topics(topics);
    if (vocab.size() == 0) throw DomainError("extract: empty vocabulary");
    for (const std::string& w : vocab.words) {
        const std::vector<OccurrenceRef>* refs = index.find(w);
        if (refs == nullptr || refs->empty())
            throw DomainError("extract: vocabulary word '" + w +
                              "' missing from the occurrence index");
    }

    const int k = topics.weights.rows;
    const int v = vocab.size();
    TopicWordTable table;
    table.words = vocab.words;
    table.correlation = Mat(k, v);
    std::vector<long long> occurrences(v, 0);

    // One pass over the corpus: each document's tokens are embedded once and
    // every indexed occurrence feeds its word's column.
    for (size_t d = 0; d < corpus.documents.size(); ++d) {
        const Document& doc = corpus.documents[d];
        bool any = false;
        for (const std::string& tok : doc.tokens)
            if (vocab.contains(tok)) {
                any = true;
                break;
            }
        if (!any) continue;
        Mat embeddings = embedder.embed_tokens(doc.tokens);
        for (size_t pos = 0; pos < doc.tokens.size(); ++pos) {
            auto it = vocab.index_of.find(doc.tokens[pos]);
            if (it == vocab.index_of.end()) continue;
            Vec scores = occurrence_scores(embeddings.row_vec(static_cast<int>(pos)), topics);
            for (int t = 0; t < k; ++t) table.correlation.at(t, it->second) += scores[t];
            ++occurrences[it->second];
        }
    }

    for (int col = 0; col < v; ++col) {
        if (occurrences[col] == 0)
            throw DomainError("extract: vocabulary word '" + vocab.words[col] +
                              "' missing from the occurrence index");
        for (int t = 0; t < k; ++t)
            table.correlation.at(t, col) /= static_cast<double>(occurrences[col]);
    }

    table.probabilities = table.correlation;
    for (int t = 0; t < k; ++t) {
        Vec row = table.probabilities.row_vec(t);
        row = l1_normalize(row);
        for (int col = 0; col < v; ++col) table.probabilities.at(t, col) = row[col];
    }
    return table;
}

std::vector<TopicWord> top_words(const TopicWordTable& table, int topic, int n) {
    if (topic < 0 || topic >= table.probabilities.rows)
        throw DomainError("extract: topic id out of range");
    const int v = static_cast<int>(table.words.size());
    if (n < 1 || n > v)
        throw DomainError("extract: requested " + std::to_string(n) + " words from a vocabulary of " +
                          std::to_string(v));

    std::vector<int> order(table.words.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double pa = table.probabilities.at(topic, a);
        double pb = table.probabilities.at(topic, b);
        if (pa != pb) return pa > pb;
        return table.words[a] < table.words[b];
    });

    std::vector<TopicWord> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i)
        out.push_back({table.words[order[i]], table.probabilities.at(topic, order[i])});
    return out;
}

std::string topic_summary(int topic, const GoalMatrix& goals, EmbeddingProvider& embedder) {
    if (topic < 0 || topic >= goals.centroids.rows)
        throw DomainError("extract: topic id out of range");
    Vec centroid = goals.centroids.row_vec(topic);

    std::string best;
    double best_score = 0.0;
    bool found = false;
    for (size_t i = 0; i < goals.candidates.size(); ++i) {
        if (goals.clusters[i] != topic) continue;
        double score = cosine(embed_phrase(embedder, goals.candidates[i]), centroid);
        if (!found || score > best_score || (score == best_score && goals.candidates[i] < best)) {
            best = goals.candidates[i];
            best_score = score;
            found = true;
        }
    }
    if (!found) throw DomainError("extract: no goal phrases in cluster " + std::to_string(topic));
    return best;
}

std::vector<TopicOutput> extract_topics(const Corpus& corpus, const Vocabulary& vocab,
                                        const OccurrenceIndex& index,
                                        EmbeddingProvider& embedder, const TopicMatrix& topics,
                                        const GoalMatrix& goals, int words_per_topic) {
    if (goals.centroids.rows != topics.weights.rows)
        throw DomainError("extract: goal matrix and topic matrix disagree on the topic count");
    TopicWordTable table = topic_word_distributions(corpus, vocab, index, embedder, topics);

    std::vector<TopicOutput> out;
    out.reserve(topics.weights.rows);
    for (int t = 0; t < topics.weights.rows; ++t) {
        TopicOutput topic;
        topic.topic_id = t;
        topic.summary = topic_summary(t, goals, embedder);
        topic.top = top_words(table, t, words_per_topic);
        out.push_back(std::move(topic));
    }
    return out;
}

std::string topics_to_json(const std::vector<TopicOutput>& topics) {
    json root;
    root["topics"] = json::array();
    for (const TopicOutput& t : topics) {
        json words = json::array();
        for (const TopicWord& w : t.top) words.push_back({{"w", w.word}, {"p", w.probability}});
        root["topics"].push_back({{"id", t.topic_id}, {"summary", t.summary}, {"words", words}});
    }
    return root.dump(2) + "\n";
}

std::vector<TopicOutput> topics_from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("topics: ") + e.what());
    }
    if (!root.is_object() || !root.contains("topics") || !root["topics"].is_array())
        throw ParseError("topics: expected an object with a \"topics\" array");
    std::vector<TopicOutput> out;
    try {
        for (const json& t : root["topics"]) {
            TopicOutput topic;
            topic.topic_id = t.at("id").get<int>();
            topic.summary = t.at("summary").get<std::string>();
            for (const json& w : t.at("words"))
                topic.top.push_back({w.at("w").get<std::string>(), w.at("p").get<double>()});
            out.push_back(std::move(topic));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("topics: ") + e.what());
    }
    return out;
}

} // namespace goaltm
