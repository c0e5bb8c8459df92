#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace goaltm {

struct Document {
    std::string id;
    std::string raw_text;
    std::vector<std::string> tokens;
    bool relevant = true;
};

struct Corpus {
    std::vector<Document> documents;
    std::string goal_text;

    const Document* find(const std::string& id) const;
};

using Stoplist = std::unordered_set<std::string>;

// Lowercases ASCII letters and splits on anything that is not alphanumeric.
// Bytes >= 0x80 are kept inside tokens so UTF-8 words survive unbroken.
// Tokens shorter than two bytes and stoplist entries are dropped.
std::vector<std::string> tokenize_fallback(const std::string& text, const Stoplist* stoplist = nullptr);

Stoplist load_stoplist(const std::string& path);

// One JSON record per line: {"id", "text", "tokens"?, "relevant"?}. Records
// without tokens fall back to tokenize_fallback. Duplicate ids and relevant
// documents with no tokens are rejected.
Corpus load_corpus(const std::string& path, const std::string& goal_text,
                   const Stoplist* stoplist = nullptr);

void save_corpus(const Corpus& corpus, const std::string& path);

struct Vocabulary {
    std::vector<std::string> words; // sorted by descending count, ties lexicographic
    std::unordered_map<std::string, int> index_of;
    std::unordered_map<std::string, long long> counts; // retained words only
    int min_count = 2;

    int size() const { return static_cast<int>(words.size()); }
    bool contains(const std::string& w) const { return index_of.count(w) > 0; }
};

Vocabulary build_vocabulary(const Corpus& corpus, int min_count = 2);

struct OccurrenceRef {
    int doc_index = 0;
    int token_pos = 0;

    bool operator==(const OccurrenceRef&) const = default;
};

// word -> every place it occurs, in document order then position order.
struct OccurrenceIndex {
    std::unordered_map<std::string, std::vector<OccurrenceRef>> by_word;

    const std::vector<OccurrenceRef>* find(const std::string& w) const;
};

OccurrenceIndex build_occurrence_index(const Corpus& corpus, const Vocabulary& vocab);

} // namespace goaltm
