#include "goaltm/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <memory>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "goaltm/corpus.hpp"
#include "goaltm/errors.hpp"
#include "goaltm/extract.hpp"
#include "goaltm/io.hpp"
#include "goaltm/metrics.hpp"
#include "goaltm/providers.hpp"
#include "goaltm/train.hpp"

using json = nlohmann::json;

namespace goaltm {

namespace {

struct Ctx {
    std::string config_path;
    std::string workspace = ".";
    std::string provider_spec;
    std::string corpus_path;
    uint64_t seed = 0;
    bool seed_set = false;
    int embedding_dim = 32;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
};

std::string art(const Ctx& c, const std::string& name) {
    return (std::filesystem::path(c.workspace) / name).string();
}

void ensure_workspace(const Ctx& c) { std::filesystem::create_directories(c.workspace); }

TrainConfig load_config(const Ctx& c) {
    if (c.config_path.empty()) throw ConfigError("config: pass --config <path>");
    TrainConfig cfg = parse_train_config(read_file_bytes(c.config_path));
    if (c.seed_set) cfg.seed = c.seed;
    validate_train_config(cfg);
    return cfg;
}

ProviderBundle providers_for(const Ctx& c, const TrainConfig& cfg) {
    if (c.provider_spec.empty())
        throw ConfigError("provider: pass --provider <fixture:path|http:url>");
    ProviderOptions opt;
    opt.seed = cfg.seed;
    opt.embedding_dim = c.embedding_dim;
    return make_providers(c.provider_spec, opt);
}

// Embedding access with an optional disk cache behind it. Commands other than
// `embed` only attach the cache when it already exists, so the warm path never
// creates files a later stage would then treat as someone else's artifact.
struct EmbedderHandle {
    std::unique_ptr<EmbeddingProvider> base;
    std::shared_ptr<EmbeddingCache> cache;
    std::unique_ptr<CachedEmbeddingProvider> cached;

    EmbeddingProvider& ref() { return cached ? static_cast<EmbeddingProvider&>(*cached) : *base; }
};

EmbedderHandle open_embedder(const Ctx& c, ProviderBundle&& bundle, bool create_cache) {
    EmbedderHandle h;
    h.base = std::move(bundle.embedding);
    std::string path = art(c, "embeddings.cache");
    std::error_code ec;
    if (create_cache || std::filesystem::exists(path, ec)) {
        if (create_cache) ensure_workspace(c);
        h.cache = std::make_shared<EmbeddingCache>(path, h.base->dim());
        h.cached = std::make_unique<CachedEmbeddingProvider>(*h.base, h.cache);
    }
    return h;
}

// Upserts this stage's stanza in the run manifest: settings digest, seed,
// provider, and a content digest per consumed and produced file. The manifest
// is derived bookkeeping, so an unreadable one is rebuilt rather than fatal.
void record_stage(const Ctx& c, const std::string& stage, const TrainConfig* cfg,
                  const std::vector<std::pair<std::string, std::string>>& inputs,
                  const std::vector<std::pair<std::string, std::string>>& outputs) {
    std::string path = art(c, "manifest.json");
    json root = json::object();
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) {
        try {
            root = json::parse(read_file_bytes(path));
        } catch (const json::exception&) {
            root = json::object();
        }
        if (!root.is_object()) root = json::object();
    }
    json stanza = json::object();
    if (cfg != nullptr) {
        stanza["config_digest"] = config_digest(*cfg);
        stanza["seed"] = cfg->seed;
    }
    if (!c.provider_spec.empty()) stanza["provider"] = c.provider_spec;
    json in = json::object();
    for (const auto& [name, p] : inputs) in[name] = sha256_hex(read_file_bytes(p));
    json outj = json::object();
    for (const auto& [name, p] : outputs) outj[name] = sha256_hex(read_file_bytes(p));
    stanza["inputs"] = in;
    stanza["outputs"] = outj;
    if (!root.contains("stages") || !root["stages"].is_object()) root["stages"] = json::object();
    root["stages"][stage] = stanza;
    ensure_workspace(c);
    atomic_write_bytes(path, root.dump(2) + "\n");
}

void print_summary(const Ctx& c, const json& summary) { *c.out << summary.dump() << "\n"; }

std::string require_corpus(const Ctx& c) {
    if (c.corpus_path.empty()) throw ConfigError("corpus: pass --corpus <path>");
    return c.corpus_path;
}

// ---------------------------------------------------------------------------
// Stage commands.

void cmd_goals(const Ctx& c) {
    TrainConfig cfg = load_config(c);
    ProviderBundle bundle = providers_for(c, cfg);
    Corpus corpus = load_corpus(require_corpus(c), cfg.goal_text);

    std::vector<DocGoals> all;
    int relevant = 0;
    for (const Document& d : corpus.documents) {
        if (!d.relevant) {
            // Pre-marked documents never reach the provider.
            all.push_back({d.id, {}, false});
            continue;
        }
        DocGoals g = summarize_goals(*bundle.completion, d, cfg.goal_text);
        if (g.relevant) ++relevant;
        all.push_back(std::move(g));
    }
    ensure_workspace(c);
    std::string out_path = art(c, "goals.jsonl");
    save_doc_goals(all, out_path);
    record_stage(c, "goals", &cfg, {{"corpus", c.corpus_path}}, {{"goals.jsonl", out_path}});
    print_summary(c, {{"command", "goals"},
                      {"documents", corpus.documents.size()},
                      {"relevant", relevant},
                      {"output", out_path}});
}

void cmd_augment(const Ctx& c) {
    TrainConfig cfg = load_config(c);
    ProviderBundle bundle = providers_for(c, cfg);
    Corpus corpus = load_corpus(require_corpus(c), cfg.goal_text);
    std::string goals_path = art(c, "goals.jsonl");
    std::vector<DocGoals> goals = load_doc_goals(goals_path);

    std::map<std::string, const DocGoals*> by_id;
    for (const DocGoals& g : goals) by_id[g.doc_id] = &g;
    std::vector<AugmentedPair> pairs;
    for (const Document& d : corpus.documents) {
        auto it = by_id.find(d.id);
        if (it == by_id.end())
            throw ValidationError("augment: no goals entry for document " + d.id);
        if (!it->second->relevant) continue;
        pairs.push_back(augment_document(*bundle.completion, d));
    }
    ensure_workspace(c);
    std::string out_path = art(c, "augmented.jsonl");
    save_augmented(pairs, out_path);
    record_stage(c, "augment", &cfg, {{"corpus", c.corpus_path}, {"goals.jsonl", goals_path}},
                 {{"augmented.jsonl", out_path}});
    print_summary(c, {{"command", "augment"},
                      {"pairs", pairs.size()},
                      {"skipped_irrelevant", corpus.documents.size() - pairs.size()},
                      {"output", out_path}});
}

void cmd_embed(const Ctx& c) {
    TrainConfig cfg = load_config(c);
    Corpus corpus = load_corpus(require_corpus(c), cfg.goal_text);
    std::string goals_path = art(c, "goals.jsonl");
    std::string pairs_path = art(c, "augmented.jsonl");
    std::vector<DocGoals> goals = load_doc_goals(goals_path);
    std::vector<AugmentedPair> pairs = load_augmented(pairs_path);

    EmbedderHandle h = open_embedder(c, providers_for(c, cfg), /*create_cache=*/true);
    for (const Document& d : corpus.documents)
        if (!d.tokens.empty()) h.ref().embed_tokens(d.tokens);
    for (const AugmentedPair& p : pairs)
        for (const std::string& text : {p.text_a, p.text_b}) {
            std::vector<std::string> tokens = tokenize_fallback(text);
            if (!tokens.empty()) h.ref().embed_tokens(tokens);
        }
    for (const DocGoals& g : goals)
        for (const std::string& phrase : g.goals)
            if (!tokenize_fallback(phrase).empty()) embed_phrase(h.ref(), phrase);

    std::string out_path = art(c, "embeddings.cache");
    record_stage(c, "embed", &cfg,
                 {{"corpus", c.corpus_path}, {"goals.jsonl", goals_path},
                  {"augmented.jsonl", pairs_path}},
                 {{"embeddings.cache", out_path}});
    print_summary(c, {{"command", "embed"},
                      {"entries", h.cache->size()},
                      {"dim", h.base->dim()},
                      {"output", out_path}});
}

void cmd_cluster_goals(const Ctx& c, int n_clusters) {
    TrainConfig cfg = load_config(c);
    Corpus corpus = load_corpus(require_corpus(c), cfg.goal_text);
    std::string goals_path = art(c, "goals.jsonl");
    std::vector<DocGoals> goals = load_doc_goals(goals_path);
    auto [filtered, goal_set] = build_goal_set(corpus, goals);

    EmbedderHandle h = open_embedder(c, providers_for(c, cfg), false);
    std::vector<AnnotationCluster> clusters =
        cluster_for_annotation(goal_set, n_clusters, h.ref(), cfg.seed);
    ensure_workspace(c);
    std::string out_path = art(c, "annotation.jsonl");
    atomic_write_bytes(out_path, annotation_to_jsonl(clusters));
    record_stage(c, "cluster-goals", &cfg,
                 {{"corpus", c.corpus_path}, {"goals.jsonl", goals_path}},
                 {{"annotation.jsonl", out_path}});
    print_summary(c, {{"command", "cluster-goals"},
                      {"phrases", goal_set.size()},
                      {"clusters", clusters.size()},
                      {"output", out_path}});
}

json log_to_json(const std::vector<TrainLogEntry>& log) {
    json entries = json::array();
    for (const TrainLogEntry& e : log)
        entries.push_back({{"step", e.step},
                           {"epoch", e.epoch},
                           {"contrastive", e.contrastive},
                           {"prior_match", e.prior_match},
                           {"ot", e.ot},
                           {"total", e.total}});
    return {{"entries", entries}};
}

json goal_matrix_to_json(const GoalMatrix& goals) {
    json centroids = json::array();
    for (int k = 0; k < goals.centroids.rows; ++k) {
        json row = json::array();
        for (int d = 0; d < goals.centroids.cols; ++d) row.push_back(goals.centroids.at(k, d));
        centroids.push_back(row);
    }
    return {{"topic_count", goals.centroids.rows},
            {"dim", goals.centroids.cols},
            {"candidates", goals.candidates},
            {"clusters", goals.clusters},
            {"centroids", centroids}};
}

void cmd_train(const Ctx& c) {
    TrainConfig cfg = load_config(c);
    Corpus corpus = load_corpus(require_corpus(c), cfg.goal_text);
    std::string goals_path = art(c, "goals.jsonl");
    std::string pairs_path = art(c, "augmented.jsonl");
    std::vector<DocGoals> goals = load_doc_goals(goals_path);
    std::vector<AugmentedPair> pairs = load_augmented(pairs_path);

    EmbedderHandle h = open_embedder(c, providers_for(c, cfg), false);
    TrainResult result = train(corpus, goals, pairs, cfg, h.ref(), c.err);

    ensure_workspace(c);
    std::string ckpt_path = art(c, "checkpoint.bin");
    std::string log_path = art(c, "train_log.json");
    std::string matrix_path = art(c, "goal_matrix.json");
    save_checkpoint(result.checkpoint, ckpt_path);
    atomic_write_bytes(log_path, log_to_json(result.log).dump(2) + "\n");
    atomic_write_bytes(matrix_path, goal_matrix_to_json(result.checkpoint.goals).dump(2) + "\n");
    record_stage(c, "train", &cfg,
                 {{"corpus", c.corpus_path}, {"goals.jsonl", goals_path},
                  {"augmented.jsonl", pairs_path}},
                 {{"checkpoint.bin", ckpt_path}, {"train_log.json", log_path},
                  {"goal_matrix.json", matrix_path}});
    json summary{{"command", "train"},
                 {"steps", result.checkpoint.steps},
                 {"skipped_documents", result.skipped_docs.size()},
                 {"output", ckpt_path}};
    if (!result.log.empty()) summary["final_loss"] = result.log.back().total;
    print_summary(c, summary);
}

void cmd_extract(const Ctx& c, int words_per_topic) {
    TrainConfig cfg = load_config(c);
    Corpus corpus = load_corpus(require_corpus(c), cfg.goal_text);
    std::string goals_path = art(c, "goals.jsonl");
    std::vector<DocGoals> goals = load_doc_goals(goals_path);
    auto [filtered, goal_set] = build_goal_set(corpus, goals);

    std::string ckpt_path = art(c, "checkpoint.bin");
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    Vocabulary vocab = build_vocabulary(filtered, cfg.min_count);
    OccurrenceIndex index = build_occurrence_index(filtered, vocab);
    EmbedderHandle h = open_embedder(c, providers_for(c, cfg), false);
    std::vector<TopicOutput> topics =
        extract_topics(filtered, vocab, index, h.ref(), ckpt.topics, ckpt.goals, words_per_topic);

    ensure_workspace(c);
    std::string out_path = art(c, "topics.json");
    atomic_write_bytes(out_path, topics_to_json(topics));
    record_stage(c, "extract", &cfg,
                 {{"corpus", c.corpus_path}, {"goals.jsonl", goals_path},
                  {"checkpoint.bin", ckpt_path}},
                 {{"topics.json", out_path}});
    print_summary(c, {{"command", "extract"},
                      {"topics", topics.size()},
                      {"vocabulary", vocab.size()},
                      {"output", out_path}});
}

std::vector<bool> load_labels(const std::string& path) {
    json root;
    try {
        root = json::parse(read_file_bytes(path));
    } catch (const json::exception& e) {
        throw ParseError("labels " + path + ": " + e.what());
    }
    if (!root.is_object() || !root.contains("labels") || !root["labels"].is_array())
        throw ParseError("labels " + path + ": expected an object with a \"labels\" array");
    std::vector<bool> out;
    for (const json& v : root["labels"]) {
        if (!v.is_boolean()) throw ParseError("labels " + path + ": labels must be booleans");
        out.push_back(v.get<bool>());
    }
    return out;
}

void cmd_eval(const Ctx& c, const std::string& truth_path, const std::string& labels_a_path,
              const std::string& labels_b_path, const std::string& mode_name,
              const std::string& run_name) {
    TrainConfig cfg = load_config(c);
    Corpus corpus = load_corpus(require_corpus(c), cfg.goal_text);
    std::string goals_path = art(c, "goals.jsonl");
    std::vector<DocGoals> goals = load_doc_goals(goals_path);
    auto [filtered, goal_set] = build_goal_set(corpus, goals);

    std::string topics_path = art(c, "topics.json");
    std::vector<TopicOutput> topics = topics_from_json(read_file_bytes(topics_path));
    GroundTruthGoals truth = load_ground_truth(truth_path);

    TopicTextMode mode;
    if (mode_name == "words") mode = TopicTextMode::TopWordsJoined;
    else if (mode_name == "summary") mode = TopicTextMode::Summary;
    else throw ConfigError("eval: --topic-text must be words or summary");

    EmbedderHandle h = open_embedder(c, providers_for(c, cfg), false);
    RelevanceScores scores = relevance_scores(topics, truth, mode, h.ref());

    std::vector<std::vector<std::string>> word_lists;
    for (const TopicOutput& t : topics) {
        std::vector<std::string> words;
        for (const TopicWord& w : t.top) words.push_back(w.word);
        word_lists.push_back(std::move(words));
    }
    CoherenceReport coherence = topic_coherence(word_lists, filtered);

    json report;
    report["run"] = run_name.empty() ? config_digest(cfg).substr(0, 12) : run_name;
    report["topic_count"] = topics.size();
    report["topic_text_mode"] = mode_name;
    report["reference_goals"] = truth.goals.size();
    report["ut"] = unique_term_score(word_lists);
    report["gs"] = goal_similarity(scores);
    json thresholds = json::array();
    json gtr = json::array();
    json gcr = json::array();
    for (double sigma : kRelevanceThresholds) {
        thresholds.push_back(sigma);
        gtr.push_back(goal_relevant_topic_rate(scores, sigma));
        gcr.push_back(goal_coverage_rate(scores, sigma));
    }
    report["thresholds"] = thresholds;
    report["gtr"] = gtr;
    report["gcr"] = gcr;
    json npmi = json::array();
    json uci = json::array();
    json oov = json::array();
    double npmi_sum = 0.0;
    double uci_sum = 0.0;
    for (const CoherenceScores& s : coherence.per_topic) {
        npmi.push_back(s.npmi);
        uci.push_back(s.uci);
        oov.push_back(s.has_out_of_vocab);
        npmi_sum += s.npmi;
        uci_sum += s.uci;
    }
    report["npmi"] = npmi;
    report["uci"] = uci;
    report["coherence_out_of_vocab"] = oov;
    report["mean_npmi"] = npmi_sum / static_cast<double>(coherence.per_topic.size());
    report["mean_uci"] = uci_sum / static_cast<double>(coherence.per_topic.size());
    // In-corpus boolean counting; scores are not comparable to reference
    // coherence toolkits and reports say so.
    report["coherence_comparable"] = false;

    std::vector<std::pair<std::string, std::string>> inputs{
        {"corpus", c.corpus_path}, {"goals.jsonl", goals_path},
        {"topics.json", topics_path}, {"truth", truth_path}};
    if (!labels_a_path.empty() || !labels_b_path.empty()) {
        if (labels_a_path.empty() || labels_b_path.empty())
            throw ConfigError("eval: --labels-a and --labels-b come as a pair");
        AgreementScores agree = agreement(load_labels(labels_a_path), load_labels(labels_b_path));
        report["agreement"] = {{"jaccard", agree.jaccard},
                               {"simple_match", agree.simple_match},
                               {"dice", agree.dice},
                               {"degenerate", agree.degenerate}};
        inputs.push_back({"labels_a", labels_a_path});
        inputs.push_back({"labels_b", labels_b_path});
    }

    ensure_workspace(c);
    std::string out_path = art(c, "report.json");
    atomic_write_bytes(out_path, report.dump(2) + "\n");
    record_stage(c, "eval", &cfg, inputs, {{"report.json", out_path}});
    print_summary(c, {{"command", "eval"},
                      {"ut", report["ut"]},
                      {"gs", report["gs"]},
                      {"output", out_path}});
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char ch : s) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    quoted += '"';
    return quoted;
}

void cmd_report(const Ctx& c, const std::vector<std::string>& inputs,
                const std::string& output) {
    std::string out_path = output.empty() ? art(c, "report.csv") : output;
    std::string csv = "run,metric,K,value\n";
    int rows = 0;
    std::vector<std::pair<std::string, std::string>> consumed;
    for (const std::string& path : inputs) {
        json report;
        try {
            report = json::parse(read_file_bytes(path));
        } catch (const json::exception& e) {
            throw ParseError("report " + path + ": " + e.what());
        }
        auto field = [&](const char* key) -> const json& {
            if (!report.is_object() || !report.contains(key))
                throw ParseError("report " + path + ": missing \"" + key + "\"");
            return report[key];
        };
        std::string run = field("run").get<std::string>();
        std::string k = json(field("topic_count")).dump();
        auto add = [&](const std::string& metric, const json& value) {
            csv += csv_field(run) + "," + csv_field(metric) + "," + k + "," + value.dump() + "\n";
            ++rows;
        };
        add("ut", field("ut"));
        add("gs", field("gs"));
        const json& thresholds = field("thresholds");
        const json& gtr = field("gtr");
        const json& gcr = field("gcr");
        if (!thresholds.is_array() || gtr.size() != thresholds.size() ||
            gcr.size() != thresholds.size())
            throw ParseError("report " + path + ": threshold and rate arrays disagree");
        for (size_t i = 0; i < thresholds.size(); ++i) {
            std::string sigma = thresholds[i].dump();
            add("gtr@" + sigma, gtr[i]);
            add("gcr@" + sigma, gcr[i]);
        }
        add("mean_npmi", field("mean_npmi"));
        add("mean_uci", field("mean_uci"));
        consumed.push_back({path, path});
    }
    ensure_workspace(c);
    atomic_write_bytes(out_path, csv);
    record_stage(c, "report", nullptr, consumed, {{"report.csv", out_path}});
    print_summary(c, {{"command", "report"}, {"rows", rows}, {"output", out_path}});
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Ctx c;
    c.out = &out;
    c.err = &err;

    CLI::App app{"goal-aligned topic modeling pipeline"};
    app.require_subcommand(1);
    auto* config_opt = app.add_option("--config", c.config_path, "run configuration JSON");
    auto* seed_opt = app.add_option("--seed", c.seed, "override the configured RNG seed");
    auto* ws_opt = app.add_option("--workspace", c.workspace, "artifact directory");
    auto* provider_opt =
        app.add_option("--provider", c.provider_spec, "fixture:<path> or http:<url>");
    auto* dim_opt = app.add_option("--embedding-dim", c.embedding_dim,
                                   "embedding width when the provider does not fix one");
    for (CLI::Option* o : {config_opt, seed_opt, ws_opt, provider_opt, dim_opt})
        o->configurable(false);

    int n_clusters = 100;
    int words_per_topic = 10;
    std::string truth_path;
    std::string labels_a_path;
    std::string labels_b_path;
    std::string mode_name = "words";
    std::string run_name;
    std::vector<std::string> report_inputs;
    std::string report_output;

    auto add_corpus = [&](CLI::App* sub) {
        sub->fallthrough(); // lets the shared options appear after the subcommand
        sub->add_option("--corpus", c.corpus_path, "corpus JSONL path")->required();
    };

    CLI::App* goals = app.add_subcommand("goals", "derive per-document goal phrases");
    add_corpus(goals);
    CLI::App* augment = app.add_subcommand("augment", "write two rewrites per relevant document");
    add_corpus(augment);
    CLI::App* embed = app.add_subcommand("embed", "pre-fill the embedding cache");
    add_corpus(embed);
    CLI::App* cluster = app.add_subcommand("cluster-goals", "emit the annotation listing");
    add_corpus(cluster);
    cluster->add_option("--clusters", n_clusters, "annotation cluster count");
    CLI::App* train_cmd = app.add_subcommand("train", "fit the topic matrix");
    add_corpus(train_cmd);
    CLI::App* extract_cmd = app.add_subcommand("extract", "write topics with words and summaries");
    add_corpus(extract_cmd);
    extract_cmd->add_option("--words", words_per_topic, "words listed per topic");
    CLI::App* eval_cmd = app.add_subcommand("eval", "score topics against reference goals");
    add_corpus(eval_cmd);
    eval_cmd->add_option("--truth", truth_path, "reference goals JSON")->required();
    eval_cmd->add_option("--labels-a", labels_a_path, "first rater labels JSON");
    eval_cmd->add_option("--labels-b", labels_b_path, "second rater labels JSON");
    eval_cmd->add_option("--topic-text", mode_name, "words|summary");
    eval_cmd->add_option("--run", run_name, "run tag stamped into the report");
    CLI::App* report_cmd = app.add_subcommand("report", "flatten reports into plot-ready CSV");
    report_cmd->fallthrough();
    report_cmd->add_option("inputs", report_inputs, "report.json files")->required();
    report_cmd->add_option("--output", report_output, "CSV destination");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        c.seed_set = seed_opt->count() > 0;

        if (goals->parsed()) cmd_goals(c);
        else if (augment->parsed()) cmd_augment(c);
        else if (embed->parsed()) cmd_embed(c);
        else if (cluster->parsed()) cmd_cluster_goals(c, n_clusters);
        else if (train_cmd->parsed()) cmd_train(c);
        else if (extract_cmd->parsed()) cmd_extract(c, words_per_topic);
        else if (eval_cmd->parsed())
            cmd_eval(c, truth_path, labels_a_path, labels_b_path, mode_name, run_name);
        else if (report_cmd->parsed()) cmd_report(c, report_inputs, report_output);
        return 0;
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const MissingArtifactError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const TransportError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const ProtocolError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    }
}

} // namespace goaltm
