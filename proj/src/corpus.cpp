#include "goaltm/corpus.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

#include "goaltm/errors.hpp"
#include "goaltm/io.hpp"

using nlohmann::json;

namespace goaltm {

const Document* Corpus::find(const std::string& id) const {
    for (const Document& d : documents)
        if (d.id == id) return &d;
    return nullptr;
}

std::vector<std::string> tokenize_fallback(const std::string& text, const Stoplist* stoplist) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&]() {
        if (cur.size() >= 2 && (!stoplist || !stoplist->count(cur))) tokens.push_back(cur);
        cur.clear();
    };
    for (unsigned char ch : text) {
        bool word_char = std::isalnum(ch) != 0 || ch >= 0x80;
        if (word_char) {
            cur.push_back(static_cast<char>(std::tolower(ch)));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

Stoplist load_stoplist(const std::string& path) {
    Stoplist stop;
    for (const std::string& line : split_lines(read_file_bytes(path))) {
        std::string w = line;
        while (!w.empty() && (w.back() == '\r' || w.back() == ' ' || w.back() == '\t')) w.pop_back();
        size_t start = w.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        stop.insert(w.substr(start));
    }
    return stop;
}

Corpus load_corpus(const std::string& path, const std::string& goal_text, const Stoplist* stoplist) {
    Corpus corpus;
    corpus.goal_text = goal_text;
    std::unordered_set<std::string> seen;
    std::vector<std::string> lines = split_lines(read_file_bytes(path));
    for (size_t ln = 0; ln < lines.size(); ++ln) {
        if (lines[ln].empty() || lines[ln] == "\r") continue;
        json rec;
        try {
            rec = json::parse(lines[ln]);
        } catch (const json::parse_error& e) {
            throw ParseError(path + ":" + std::to_string(ln + 1) + ": bad JSON record: " + e.what());
        }
        if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string() ||
            !rec.contains("text") || !rec["text"].is_string())
            throw ParseError(path + ":" + std::to_string(ln + 1) + ": record needs string id and text");

        Document d;
        d.id = rec["id"].get<std::string>();
        d.raw_text = rec["text"].get<std::string>();
        if (rec.contains("relevant")) {
            if (!rec["relevant"].is_boolean())
                throw ParseError(path + ":" + std::to_string(ln + 1) + ": relevant must be boolean");
            d.relevant = rec["relevant"].get<bool>();
        }
        if (rec.contains("tokens")) {
            if (!rec["tokens"].is_array())
                throw ParseError(path + ":" + std::to_string(ln + 1) + ": tokens must be an array");
            for (const auto& t : rec["tokens"]) {
                if (!t.is_string())
                    throw ParseError(path + ":" + std::to_string(ln + 1) + ": tokens must be strings");
                d.tokens.push_back(t.get<std::string>());
            }
        } else {
            d.tokens = tokenize_fallback(d.raw_text, stoplist);
        }

        if (!seen.insert(d.id).second)
            throw ValidationError(path + ": duplicate document id '" + d.id + "'");
        if (d.relevant && d.tokens.empty())
            throw ValidationError(path + ": relevant document '" + d.id + "' has no tokens");
        corpus.documents.push_back(std::move(d));
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::string out;
    for (const Document& d : corpus.documents) {
        json rec;
        rec["id"] = d.id;
        rec["text"] = d.raw_text;
        rec["tokens"] = d.tokens;
        rec["relevant"] = d.relevant;
        out += rec.dump();
        out += '\n';
    }
    atomic_write_bytes(path, out);
}

Vocabulary build_vocabulary(const Corpus& corpus, int min_count) {
    if (min_count < 1) throw DomainError("build_vocabulary: min_count must be at least 1");
    Vocabulary vocab;
    vocab.min_count = min_count;
    std::unordered_map<std::string, long long> counts;
    for (const Document& d : corpus.documents)
        for (const std::string& t : d.tokens) counts[t]++;

    for (const auto& [word, count] : counts)
        if (count >= min_count) vocab.words.push_back(word);
    std::sort(vocab.words.begin(), vocab.words.end(), [&](const std::string& a, const std::string& b) {
        long long ca = counts[a], cb = counts[b];
        if (ca != cb) return ca > cb;
        return a < b;
    });
    for (size_t i = 0; i < vocab.words.size(); ++i) {
        vocab.index_of[vocab.words[i]] = static_cast<int>(i);
        vocab.counts[vocab.words[i]] = counts[vocab.words[i]];
    }
    return vocab;
}

const std::vector<OccurrenceRef>* OccurrenceIndex::find(const std::string& w) const {
    auto it = by_word.find(w);
    return it == by_word.end() ? nullptr : &it->second;
}

OccurrenceIndex build_occurrence_index(const Corpus& corpus, const Vocabulary& vocab) {
    OccurrenceIndex index;
    for (size_t di = 0; di < corpus.documents.size(); ++di) {
        const Document& d = corpus.documents[di];
        for (size_t pos = 0; pos < d.tokens.size(); ++pos)
            if (vocab.contains(d.tokens[pos]))
                index.by_word[d.tokens[pos]].push_back(
                    {static_cast<int>(di), static_cast<int>(pos)});
    }
    return index;
}

} // namespace goaltm
