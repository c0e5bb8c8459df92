#pragma once

#include <string>
#include <vector>

#include "goaltm/corpus.hpp"
#include "goaltm/model.hpp"
#include "goaltm/providers.hpp"
#include "goaltm/vecmat.hpp"

namespace goaltm {

// Per-topic word probabilities, derived from occurrence-level correlations.
struct TopicWordTable {
    std::vector<std::string> words; // column order, same as the vocabulary
    Mat correlation;                // topics x words, column v = mean occurrence score of word v
    Mat probabilities;              // correlation with each row scaled to sum 1
};

struct TopicWord {
    std::string word;
    double probability = 0.0;
};

struct TopicOutput {
    int topic_id = 0;
    std::string summary;
    std::vector<TopicWord> top;
};

// Softmax over cos(occurrence embedding, topic row), averaged over every
// occurrence of the word in the original documents. Throws DomainError if the
// word never occurs.
Vec word_topic_correlations(const std::string& word, const Corpus& corpus,
                            const OccurrenceIndex& index, EmbeddingProvider& embedder,
                            const TopicMatrix& topics);

// Full table for the vocabulary. Embeds each document once; memory stays at
// one document's token matrix plus the topics x vocabulary accumulators.
TopicWordTable topic_word_distributions(const Corpus& corpus, const Vocabulary& vocab,
                                        const OccurrenceIndex& index,
                                        EmbeddingProvider& embedder, const TopicMatrix& topics);

// The n highest-probability words of one topic row, ties broken by word.
std::vector<TopicWord> top_words(const TopicWordTable& table, int topic, int n = 10);

// Cluster member whose phrase embedding lies closest (by cosine) to the
// topic's centroid, ties broken by phrase.
std::string topic_summary(int topic, const GoalMatrix& goals, EmbeddingProvider& embedder);

std::vector<TopicOutput> extract_topics(const Corpus& corpus, const Vocabulary& vocab,
                                        const OccurrenceIndex& index,
                                        EmbeddingProvider& embedder, const TopicMatrix& topics,
                                        const GoalMatrix& goals, int words_per_topic = 10);

// {"topics": [{"id", "summary", "words": [{"w", "p"}]}]} with a trailing newline.
std::string topics_to_json(const std::vector<TopicOutput>& topics);
std::vector<TopicOutput> topics_from_json(const std::string& text);

} // namespace goaltm
