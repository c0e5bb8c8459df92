#include "goaltm/providers.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "goaltm/errors.hpp"
#include "goaltm/io.hpp"

using nlohmann::json;

namespace goaltm {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
    for (char& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string preview(const std::string& s, size_t cap = 200) {
    if (s.size() <= cap) return s;
    return s.substr(0, cap) + "...";
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double unit_interval(uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

void unit_normalize(Vec& v) {
    double n = norm2(v);
    if (n < 1e-12) {
        std::fill(v.begin(), v.end(), 0.0);
        v[0] = 1.0;
        return;
    }
    for (double& x : v) x /= n;
}

Vec hash_unit_vec(uint64_t seed, const std::string& token, int dim) {
    uint64_t state = seed ^ fnv1a64(token);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = 2.0 * unit_interval(splitmix64(state)) - 1.0;
    unit_normalize(v);
    return v;
}

std::string env_api_key() {
    const char* key = std::getenv("GOALTM_API_KEY");
    return key ? std::string(key) : std::string();
}

} // namespace

// ---------------------------------------------------------------------------
// Goal and augmentation parsing shared by every completion backend.

DocGoals summarize_goals(CompletionProvider& provider, const Document& doc,
                         const std::string& goal_text) {
    if (trim(doc.raw_text).empty()) throw DomainError("summarize_goals: empty document " + doc.id);
    if (trim(goal_text).empty()) throw DomainError("summarize_goals: empty goal text");

    std::string raw = provider.summarize(doc, goal_text);
    std::string cleaned = trim(raw);
    std::string tag = cleaned;
    while (!tag.empty() && (tag.back() == '.' || tag.back() == '!')) tag.pop_back();
    if (lower(trim(tag)) == "irrelevant") return DocGoals{doc.id, {}, false};

    std::vector<std::string> phrases;
    size_t start = 0;
    while (start <= cleaned.size()) {
        size_t semi = cleaned.find(';', start);
        std::string piece =
            semi == std::string::npos ? cleaned.substr(start) : cleaned.substr(start, semi - start);
        piece = trim(piece);
        if (!piece.empty()) phrases.push_back(piece);
        if (semi == std::string::npos) break;
        start = semi + 1;
    }
    if (phrases.size() < 3 || phrases.size() > 5)
        throw FormatError("goal summarization for '" + doc.id + "' gave " +
                          std::to_string(phrases.size()) + " phrases, want 3 to 5: " + preview(raw));
    return DocGoals{doc.id, phrases, true};
}

AugmentedPair augment_document(CompletionProvider& provider, const Document& doc) {
    if (trim(doc.raw_text).empty()) throw DomainError("augment_document: empty document " + doc.id);
    auto [a, b] = provider.augment(doc);
    a = trim(a);
    b = trim(b);
    if (a.empty() || b.empty())
        throw FormatError("augmentation for '" + doc.id + "' produced an empty rewrite");
    return AugmentedPair{doc.id, a, b};
}

// ---------------------------------------------------------------------------
// Fixture completion backend.

FixtureCompletionProvider::FixtureCompletionProvider(const std::string& fixture_json_text) {
    json j;
    try {
        j = json::parse(fixture_json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("fixture: bad JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("fixture: top level must be an object");
    if (j.contains("goals")) {
        if (!j["goals"].is_object()) throw ParseError("fixture: goals must be an object");
        for (const auto& [id, value] : j["goals"].items()) {
            if (!value.is_string()) throw ParseError("fixture: goals values must be strings");
            goals_[id] = value.get<std::string>();
        }
    }
    if (j.contains("augment")) {
        if (!j["augment"].is_object()) throw ParseError("fixture: augment must be an object");
        for (const auto& [id, value] : j["augment"].items()) {
            if (!value.is_array() || value.size() < 2 || !value[0].is_string() || !value[1].is_string())
                throw ParseError("fixture: augment values must be [text_a, text_b]");
            augment_[id] = {value[0].get<std::string>(), value[1].get<std::string>()};
        }
    }
    if (j.contains("augment_mode")) {
        std::string mode = j["augment_mode"].get<std::string>();
        if (mode == "identity")
            identity_augment_ = true;
        else if (mode != "strict")
            throw ParseError("fixture: augment_mode must be 'strict' or 'identity'");
    }
    digest_ = sha256_hex(fixture_json_text).substr(0, 12);
}

std::string FixtureCompletionProvider::id() const { return "fixture:" + digest_; }

std::string FixtureCompletionProvider::summarize(const Document& doc, const std::string&) {
    auto it = goals_.find(doc.id);
    if (it == goals_.end()) throw FormatError("fixture has no goal entry for '" + doc.id + "'");
    return it->second;
}

std::pair<std::string, std::string> FixtureCompletionProvider::augment(const Document& doc) {
    auto it = augment_.find(doc.id);
    if (it != augment_.end()) return it->second;
    if (identity_augment_) return {doc.raw_text, doc.raw_text};
    throw FormatError("fixture has no augment entry for '" + doc.id + "'");
}

// ---------------------------------------------------------------------------
// HTTP backends.

PromptTemplates PromptTemplates::defaults() {
    PromptTemplates t;
    t.goal_system = "You analyze personal writing and report what the author expresses.";
    t.goal_user =
        "Focus: {goal}\n\nText:\n{document}\n\n"
        "Reply with 3 to 5 short phrases, separated by semicolons, describing what the text "
        "expresses about the focus. If the text has nothing to do with the focus, reply with "
        "the single word: irrelevant";
    t.augment_system = "You rewrite text without changing its meaning.";
    t.augment_user =
        "Rewrite the following text in different words while keeping every detail of its "
        "meaning. Reply with the rewritten text only.\n\n{document}";
    return t;
}

namespace {

struct UrlParts {
    std::string host; // scheme://host[:port]
    std::string prefix;
};

UrlParts parse_base_url(const std::string& base) {
    size_t scheme = base.find("://");
    if (scheme == std::string::npos)
        throw ConfigError("provider url must start with http:// or https://: " + base);
    size_t slash = base.find('/', scheme + 3);
    UrlParts parts;
    parts.host = slash == std::string::npos ? base : base.substr(0, slash);
    parts.prefix = slash == std::string::npos ? "" : base.substr(slash);
    while (!parts.prefix.empty() && parts.prefix.back() == '/') parts.prefix.pop_back();
    return parts;
}

json post_json(const HttpOptions& opt, const std::string& api_key, const std::string& path,
               const json& body) {
    UrlParts url = parse_base_url(opt.base_url);
    std::string payload = body.dump();
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    std::string last_error;
    for (int attempt = 0; attempt < opt.attempts; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(
                std::chrono::milliseconds(opt.backoff_ms * (1 << (attempt - 1))));
        httplib::Client client(url.host);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(120, 0);
        auto res = client.Post(url.prefix + path, headers, payload, "application/json");
        if (res && res->status == 200) {
            try {
                return json::parse(res->body);
            } catch (const json::parse_error& e) {
                throw ProtocolError("provider returned unparseable JSON from " + path + ": " +
                                    e.what());
            }
        }
        last_error = res ? "HTTP status " + std::to_string(res->status)
                         : std::string("transport: ") + httplib::to_string(res.error());
    }
    throw TransportError("POST " + opt.base_url + path + " failed after " +
                         std::to_string(opt.attempts) + " attempts (" + last_error + ")");
}

} // namespace

HttpCompletionProvider::HttpCompletionProvider(HttpOptions options)
    : opt_(std::move(options)), api_key_(env_api_key()) {}

std::string HttpCompletionProvider::id() const {
    return "http:" + opt_.base_url + ":" + opt_.completion_model;
}

std::string HttpCompletionProvider::complete(const std::string& system, const std::string& user) {
    json body{{"model", opt_.completion_model},
              {"messages",
               json::array({json{{"role", "system"}, {"content", system}},
                            json{{"role", "user"}, {"content", user}}})},
              {"temperature", opt_.temperature}};
    json res = post_json(opt_, api_key_, "/chat/completions", body);
    if (!res.contains("choices") || !res["choices"].is_array() || res["choices"].empty() ||
        !res["choices"][0].contains("message") || !res["choices"][0]["message"].contains("content") ||
        !res["choices"][0]["message"]["content"].is_string())
        throw ProtocolError("completion response missing choices[0].message.content");
    return res["choices"][0]["message"]["content"].get<std::string>();
}

std::string HttpCompletionProvider::summarize(const Document& doc, const std::string& goal_text) {
    std::string user = replace_all(opt_.templates.goal_user, "{goal}", goal_text);
    user = replace_all(user, "{document}", doc.raw_text);
    return complete(opt_.templates.goal_system, user);
}

std::pair<std::string, std::string> HttpCompletionProvider::augment(const Document& doc) {
    std::string user = replace_all(opt_.templates.augment_user, "{document}", doc.raw_text);
    std::string a = complete(opt_.templates.augment_system, user);
    std::string b = complete(opt_.templates.augment_system, user);
    return {a, b};
}

// ---------------------------------------------------------------------------
// Embedding backends.

Vec embed_phrase(EmbeddingProvider& provider, const std::string& phrase) {
    std::vector<std::string> tokens = tokenize_fallback(phrase);
    if (tokens.empty()) throw DomainError("embed_phrase: phrase has no usable tokens: " + preview(phrase));
    Mat m = provider.embed_tokens(tokens);
    Vec mean(m.cols, 0.0);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) mean[c] += m.at(r, c);
    for (double& x : mean) x /= m.rows;
    return mean;
}

FixtureHashEmbedding::FixtureHashEmbedding(int dim, uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim <= 0) throw ConfigError("embedding dim must be positive");
}

std::string FixtureHashEmbedding::id() const {
    return "fixture-hash:dim=" + std::to_string(dim_) + ":seed=" + std::to_string(seed_);
}

Mat FixtureHashEmbedding::embed_tokens(const std::vector<std::string>& tokens) {
    Mat out(static_cast<int>(tokens.size()), dim_);
    for (size_t i = 0; i < tokens.size(); ++i)
        out.set_row(static_cast<int>(i), hash_unit_vec(seed_, tokens[i], dim_));
    return out;
}

PlantedEmbedding::PlantedEmbedding(int dim, uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim <= 0) throw ConfigError("embedding dim must be positive");
}

std::string PlantedEmbedding::id() const {
    return "planted:dim=" + std::to_string(dim_) + ":seed=" + std::to_string(seed_);
}

std::optional<int> PlantedEmbedding::planted_cluster(const std::string& token) {
    if (token.size() < 2 || token[0] != 'c') return std::nullopt;
    size_t pos = 1;
    long long k = 0;
    while (pos < token.size() && std::isdigit(static_cast<unsigned char>(token[pos]))) {
        k = (k * 10 + (token[pos] - '0')) % 1000000007;
        ++pos;
    }
    if (pos == 1) return std::nullopt;
    return static_cast<int>(k);
}

Mat PlantedEmbedding::embed_tokens(const std::vector<std::string>& tokens) {
    Mat out(static_cast<int>(tokens.size()), dim_);
    for (size_t i = 0; i < tokens.size(); ++i) {
        std::optional<int> cluster = planted_cluster(tokens[i]);
        if (!cluster) {
            out.set_row(static_cast<int>(i), hash_unit_vec(seed_, tokens[i], dim_));
            continue;
        }
        Vec v(dim_, 0.0);
        v[*cluster % dim_] = 1.0;
        uint64_t state = (seed_ + 0x517cc1b727220a95ull) ^ fnv1a64(tokens[i]);
        Vec noise(dim_);
        for (int d = 0; d < dim_; ++d) noise[d] = 2.0 * unit_interval(splitmix64(state)) - 1.0;
        double n = norm2(noise);
        double scale = 0.1 * unit_interval(splitmix64(state));
        if (n > 0.0)
            for (int d = 0; d < dim_; ++d) v[d] += noise[d] * (scale / n);
        unit_normalize(v);
        out.set_row(static_cast<int>(i), v);
    }
    return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpOptions options)
    : opt_(std::move(options)), api_key_(env_api_key()) {
    if (opt_.embedding_dim <= 0) throw ConfigError("embedding dim must be positive");
}

std::string HttpEmbeddingProvider::id() const {
    return "http:" + opt_.base_url + ":" + opt_.embedding_model + ":dim=" +
           std::to_string(opt_.embedding_dim);
}

Mat HttpEmbeddingProvider::embed_tokens(const std::vector<std::string>& tokens) {
    Mat out(static_cast<int>(tokens.size()), opt_.embedding_dim);
    const size_t batch = 512;
    for (size_t start = 0; start < tokens.size(); start += batch) {
        size_t end = std::min(tokens.size(), start + batch);
        json input = json::array();
        for (size_t i = start; i < end; ++i) input.push_back(tokens[i]);
        json body{{"model", opt_.embedding_model}, {"input", input}};
        json res = post_json(opt_, api_key_, "/embeddings", body);
        if (!res.contains("data") || !res["data"].is_array() || res["data"].size() != end - start)
            throw ProtocolError("embedding response data count mismatch");
        for (size_t i = start; i < end; ++i) {
            const json& item = res["data"][i - start];
            if (!item.contains("embedding") || !item["embedding"].is_array())
                throw ProtocolError("embedding response item missing embedding array");
            const json& emb = item["embedding"];
            if (static_cast<int>(emb.size()) != opt_.embedding_dim)
                throw ProtocolError("embedding dimension mismatch: got " +
                                    std::to_string(emb.size()) + ", configured " +
                                    std::to_string(opt_.embedding_dim));
            for (int d = 0; d < opt_.embedding_dim; ++d) {
                if (!emb[d].is_number()) throw ProtocolError("embedding entries must be numbers");
                out.at(static_cast<int>(i), d) = emb[d].get<double>();
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Artifact I/O.

void save_doc_goals(const std::vector<DocGoals>& goals, const std::string& path) {
    std::string out;
    for (const DocGoals& g : goals) {
        json rec{{"doc_id", g.doc_id}, {"goals", g.goals}, {"relevant", g.relevant}};
        out += rec.dump();
        out += '\n';
    }
    atomic_write_bytes(path, out);
}

std::vector<DocGoals> load_doc_goals(const std::string& path) {
    std::vector<DocGoals> goals;
    std::vector<std::string> lines = split_lines(read_file_bytes(path));
    for (size_t ln = 0; ln < lines.size(); ++ln) {
        if (lines[ln].empty() || lines[ln] == "\r") continue;
        json rec;
        try {
            rec = json::parse(lines[ln]);
        } catch (const json::parse_error& e) {
            throw ParseError(path + ":" + std::to_string(ln + 1) + ": bad JSON record: " + e.what());
        }
        if (!rec.contains("doc_id") || !rec["doc_id"].is_string() || !rec.contains("goals") ||
            !rec["goals"].is_array() || !rec.contains("relevant") || !rec["relevant"].is_boolean())
            throw ParseError(path + ":" + std::to_string(ln + 1) +
                             ": record needs doc_id, goals, relevant");
        DocGoals g;
        g.doc_id = rec["doc_id"].get<std::string>();
        for (const auto& p : rec["goals"]) {
            if (!p.is_string())
                throw ParseError(path + ":" + std::to_string(ln + 1) + ": goals must be strings");
            g.goals.push_back(p.get<std::string>());
        }
        g.relevant = rec["relevant"].get<bool>();
        goals.push_back(std::move(g));
    }
    return goals;
}

void save_augmented(const std::vector<AugmentedPair>& pairs, const std::string& path) {
    std::string out;
    for (const AugmentedPair& p : pairs) {
        json rec{{"doc_id", p.doc_id}, {"text_a", p.text_a}, {"text_b", p.text_b}};
        out += rec.dump();
        out += '\n';
    }
    atomic_write_bytes(path, out);
}

std::vector<AugmentedPair> load_augmented(const std::string& path) {
    std::vector<AugmentedPair> pairs;
    std::vector<std::string> lines = split_lines(read_file_bytes(path));
    for (size_t ln = 0; ln < lines.size(); ++ln) {
        if (lines[ln].empty() || lines[ln] == "\r") continue;
        json rec;
        try {
            rec = json::parse(lines[ln]);
        } catch (const json::parse_error& e) {
            throw ParseError(path + ":" + std::to_string(ln + 1) + ": bad JSON record: " + e.what());
        }
        if (!rec.contains("doc_id") || !rec["doc_id"].is_string() || !rec.contains("text_a") ||
            !rec["text_a"].is_string() || !rec.contains("text_b") || !rec["text_b"].is_string())
            throw ParseError(path + ":" + std::to_string(ln + 1) +
                             ": record needs doc_id, text_a, text_b");
        pairs.push_back({rec["doc_id"].get<std::string>(), rec["text_a"].get<std::string>(),
                         rec["text_b"].get<std::string>()});
    }
    return pairs;
}

// ---------------------------------------------------------------------------
// Provider wiring.

ProviderBundle make_providers(const std::string& spec, const ProviderOptions& options) {
    ProviderBundle bundle;
    if (spec.rfind("fixture:", 0) == 0) {
        std::string path = spec.substr(8);
        std::string text = read_file_bytes(path);
        bundle.completion = std::make_unique<FixtureCompletionProvider>(text);

        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("fixture: bad JSON: ") + e.what());
        }
        std::string kind = "fixture-hash";
        int dim = options.embedding_dim;
        uint64_t seed = options.seed;
        if (j.contains("embedding")) {
            const json& e = j["embedding"];
            if (e.contains("kind")) kind = e["kind"].get<std::string>();
            if (e.contains("dim")) dim = e["dim"].get<int>();
            if (e.contains("seed")) seed = e["seed"].get<uint64_t>();
        }
        if (kind == "fixture-hash")
            bundle.embedding = std::make_unique<FixtureHashEmbedding>(dim, seed);
        else if (kind == "planted")
            bundle.embedding = std::make_unique<PlantedEmbedding>(dim, seed);
        else
            throw ConfigError("fixture: unknown embedding kind '" + kind + "'");
        return bundle;
    }

    std::string url;
    if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0)
        url = spec;
    else if (spec.rfind("http:", 0) == 0) {
        std::string tail = spec.substr(5);
        url = tail.rfind("//", 0) == 0 ? "http:" + tail : "http://" + tail;
    } else {
        throw ConfigError("provider spec must be fixture:<path> or http:<url>, got '" + spec + "'");
    }
    HttpOptions http = options.http;
    http.base_url = url;
    bundle.completion = std::make_unique<HttpCompletionProvider>(http);
    bundle.embedding = std::make_unique<HttpEmbeddingProvider>(http);
    return bundle;
}

} // namespace goaltm
