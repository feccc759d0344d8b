#include "graf/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "graf/checkpoint.hpp"
#include "graf/claims.hpp"
#include "graf/dataset.hpp"
#include "graf/embedding.hpp"
#include "graf/evaluation.hpp"
#include "graf/kernels.hpp"
#include "graf/kg.hpp"
#include "graf/retrieval.hpp"
#include "graf/scorer.hpp"
#include "graf/synthetic.hpp"
#include "graf/training.hpp"

namespace graf {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!text::trim(line).empty()) lines.push_back(line);
    }
    return lines;
}

struct Common {
    std::string lemmas_path;
    std::uint64_t seed = 0;
    std::string kernels;
    std::unique_ptr<text::LemmaTable> lemmas;

    const text::LemmaTable* lemma_table() {
        if (!lemmas_path.empty() && !lemmas) lemmas = std::make_unique<text::LemmaTable>(text::LemmaTable::load(lemmas_path));
        return lemmas.get();
    }
};

struct ScoringFlags {
    std::string kg_path;
    std::string client = "stub";
    std::string model_name = "default";
    std::string lang = "en";
    std::string embedding_table;
    std::size_t top_k = 10;
    std::size_t depth = 1;
    std::size_t max_entities = 50;
    bool neighbor_names = false;
    bool no_claims = false;
    bool no_kg = false;
};

void add_scoring_flags(CLI::App* cmd, ScoringFlags& f) {
    cmd->add_option("--kg", f.kg_path, "Knowledge graph file")->required();
    cmd->add_option("--client", f.client, "Claim extractor: stub | fixture:DIR | http:URL")->capture_default_str();
    cmd->add_option("--model", f.model_name, "Model name sent to the HTTP endpoint")->capture_default_str();
    cmd->add_option("--lang", f.lang, "Extraction prompt language (en|ro)")->capture_default_str();
    cmd->add_option("--embedding-table", f.embedding_table, "Token embedding table (token v1 .. vd per line)");
    cmd->add_option("--top-k", f.top_k, "BM25 seed entities")->capture_default_str();
    cmd->add_option("--depth", f.depth, "Expansion hops")->capture_default_str();
    cmd->add_option("--max-entities", f.max_entities, "Subgraph entity cap")->capture_default_str();
    cmd->add_flag("--neighbor-names", f.neighbor_names, "Index neighbor names in entity documents");
    cmd->add_flag("--no-claims", f.no_claims, "Replace every claim graph with an empty graph");
    cmd->add_flag("--no-kg", f.no_kg, "Replace every subgraph with an empty graph");
}

std::unique_ptr<ClaimExtractor> make_extractor(const ScoringFlags& f) {
    if (f.no_claims) return std::make_unique<NullClaimExtractor>();
    const PromptLanguage lang = parse_prompt_language(f.lang);
    if (f.client == "stub") return std::make_unique<StubClaimExtractor>();
    if (f.client == "pattern") return std::make_unique<LlmClaimExtractor>(std::make_shared<PatternClient>(), lang);
    if (f.client.starts_with("fixture:")) {
        return std::make_unique<LlmClaimExtractor>(std::make_shared<FixtureClient>(f.client.substr(8)), lang);
    }
    if (f.client.starts_with("http:")) {
        std::string url = f.client.substr(5);
        if (!url.starts_with("http://")) url = "http://" + url;
        const char* token = std::getenv("GRAF_CLIENT_TOKEN");
        return std::make_unique<LlmClaimExtractor>(
            std::make_shared<HttpClient>(url, f.model_name, token != nullptr ? token : ""), lang);
    }
    throw UsageError("unknown --client '" + f.client + "' (expected stub, pattern, fixture:DIR or http:URL)");
}

std::shared_ptr<const CompletionClient> make_client(const std::string& desc, const std::string& model) {
    if (desc == "pattern" || desc == "stub") return std::make_shared<PatternClient>();
    if (desc.starts_with("fixture:")) return std::make_shared<FixtureClient>(desc.substr(8));
    if (desc.starts_with("http:")) {
        std::string url = desc.substr(5);
        if (!url.starts_with("http://")) url = "http://" + url;
        const char* token = std::getenv("GRAF_CLIENT_TOKEN");
        return std::make_shared<HttpClient>(url, model, token != nullptr ? token : "");
    }
    throw UsageError("unknown --client '" + desc + "'");
}

std::unique_ptr<Encoder> make_encoder(const std::string& table, std::size_t dim, std::uint64_t seed,
                                      const text::LemmaTable* lemmas) {
    if (!table.empty()) {
        auto enc = load_embedding_table(table, seed, dim, lemmas);
        if (enc->dim() != dim) {
            throw std::runtime_error("embedding table has dimension " + std::to_string(enc->dim()) + ", model uses " +
                                     std::to_string(dim));
        }
        return enc;
    }
    return std::make_unique<HashEncoder>(dim, seed, lemmas);
}

SampleConfig sample_config(const ScoringFlags& f) {
    SampleConfig c;
    c.top_k = f.top_k;
    c.depth = f.depth;
    c.max_entities = f.max_entities;
    c.neighbor_names_in_document = f.neighbor_names;
    c.validate();
    return c;
}

std::string fmt_double(double v) {
    std::ostringstream s;
    s.precision(6);
    s << std::fixed << v;
    return s.str();
}

// ---- build-kg

int cmd_build_kg(const std::vector<std::string>& inputs, const std::string& out_path, std::ostream& out) {
    std::vector<Triplet> all;
    std::size_t skipped = 0;
    for (const auto& path : inputs) {
        TripletBlock block = parse_triplet_block(read_file(path));
        skipped += block.skipped;
        all.insert(all.end(), block.triplets.begin(), block.triplets.end());
    }
    const KnowledgeGraph kg = build_graph(all);
    persist_graph(kg, out_path);
    out << "entities " << kg.entity_count() << " edges " << kg.edge_count() << " skipped_lines " << skipped << "\n";
    return 0;
}

// ---- extract

struct ExtractFlags {
    std::vector<std::string> corpus;
    std::string out_path;
    std::string client = "pattern";
    std::string model_name = "default";
    std::string lang = "en";
    std::string dump_prompts;
    std::size_t chunk_size = 50;
    std::size_t overlap = 25;
};

int cmd_extract(const ExtractFlags& f, Common& common, std::ostream& out) {
    const PromptLanguage lang = parse_prompt_language(f.lang);
    const auto client = make_client(f.client, f.model_name);
    std::vector<text::TokenSeq> articles;
    for (const auto& path : f.corpus) {
        for (const auto& line : read_lines(path)) articles.push_back(text::normalize(line, common.lemma_table()));
    }
    const auto chunks = chunk_corpus(articles, f.chunk_size, f.overlap);
    std::string triplets;
    std::size_t count = 0;
    std::size_t empty = 0;
    for (const auto& chunk : chunks) {
        const std::string doc = text::join(chunk.tokens);
        const std::string prompt = render_prompt(doc, lang);
        if (!f.dump_prompts.empty()) write_file(f.dump_prompts + "/" + prompt_hash(prompt) + ".prompt.txt", prompt);
        TripletBlock block = parse_triplet_block(client->complete(prompt));
        if (block.triplets.empty()) block = parse_triplet_block(client->complete(prompt));
        if (block.triplets.empty()) ++empty;
        for (const auto& t : block.triplets) {
            triplets += format_triplet(t) + "\n";
            ++count;
        }
    }
    triplets += "STOP\n";
    write_file(f.out_path, triplets);
    out << "chunks " << chunks.size() << " triplets " << count << " empty_chunks " << empty << "\n";
    return 0;
}

// ---- sample

int cmd_sample(const ScoringFlags& f, const std::string& query, const std::string& out_path, Common& common,
               std::ostream& out) {
    const KnowledgeGraph kg = load_graph(f.kg_path);
    const SubgraphSampler sampler(kg, sample_config(f), common.lemma_table());
    const SubGraph sg = sampler.sample(query);
    nlohmann::ordered_json j;
    j["query"] = query;
    std::vector<std::string> seeds;
    for (auto s : sg.seeds) seeds.push_back(sg.graph.name(s));
    j["seeds"] = seeds;
    std::vector<std::string> entities;
    for (EntityId i = 0; i < sg.graph.entity_count(); ++i) entities.push_back(sg.graph.name(i));
    j["entities"] = entities;
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (const auto& t : sg.graph.triplets()) edges.push_back({t.head, t.relation, t.tail});
    j["edges"] = edges;
    const std::string dump = j.dump(2) + "\n";
    if (out_path.empty()) out << dump; else write_file(out_path, dump);
    return 0;
}

// ---- train

struct TrainFlags {
    std::string dataset;
    std::string validation;
    std::string out_path;
    std::string log_path;
    double lr = 1e-7;
    std::size_t epochs = 50;
    std::string loss = "bce";
    std::size_t dim = 64;
    std::size_t heads = 6;
    std::size_t checkpoint_every = 0;
    double weight_decay = 0.01;
};

int cmd_train(const TrainFlags& t, const ScoringFlags& f, Common& common, std::ostream& out) {
    const auto train_items = load_mcqa(t.dataset);
    std::vector<MCQAItem> val_items;
    if (!t.validation.empty()) val_items = load_mcqa(t.validation);
    const KnowledgeGraph kg = load_graph(f.kg_path);
    const auto lemmas = common.lemma_table();
    const SubgraphSampler sampler(kg, sample_config(f), lemmas);
    const auto extractor = make_extractor(f);
    const auto encoder = make_encoder(f.embedding_table, t.dim, common.seed, lemmas);
    const Pipeline pipeline(*extractor, f.no_kg ? nullptr : &sampler, *encoder, {!f.no_claims, !f.no_kg});

    TrainConfig cfg;
    cfg.learning_rate = t.lr;
    cfg.epochs = t.epochs;
    cfg.loss = parse_loss_kind(t.loss);
    cfg.dim = t.dim;
    cfg.heads = t.heads;
    cfg.seed = common.seed;
    cfg.weight_decay = t.weight_decay;
    cfg.checkpoint_every = t.checkpoint_every;

    CheckpointMeta meta;
    meta.encoder_seed = common.seed;
    meta.attributes = {{"top_k", std::to_string(f.top_k)},
                       {"depth", std::to_string(f.depth)},
                       {"max_entities", std::to_string(f.max_entities)},
                       {"neighbor_names", f.neighbor_names ? "1" : "0"},
                       {"use_claims", f.no_claims ? "0" : "1"},
                       {"use_kg", f.no_kg ? "0" : "1"},
                       {"loss", t.loss}};

    std::string log = "epoch,mean_loss,train_accuracy,validation_accuracy,loss_evaluations\n";
    TrainCallbacks cb;
    cb.on_epoch = [&](const EpochLog& e) {
        log += std::to_string(e.epoch) + "," + fmt_double(e.mean_loss) + "," + fmt_double(e.train_accuracy) + "," +
               (std::isnan(e.validation_accuracy) ? std::string() : fmt_double(e.validation_accuracy)) + "," +
               std::to_string(e.loss_evaluations) + "\n";
    };
    cb.on_checkpoint = [&](std::size_t epoch, const Model& m) {
        save_checkpoint(m, meta, t.out_path + ".epoch" + std::to_string(epoch));
    };
    const TrainResult result = train(train_items, val_items, pipeline, cfg, cb);
    meta.attributes["best_epoch"] = std::to_string(result.best_epoch);
    save_checkpoint(result.best, meta, t.out_path);
    if (!t.log_path.empty()) write_file(t.log_path, log);
    const EpochLog& best = result.log.at(result.best_epoch - 1);
    out << "epochs " << result.log.size() << " best_epoch " << result.best_epoch << " train_accuracy "
        << fmt_double(best.train_accuracy);
    if (!val_items.empty()) out << " validation_accuracy " << fmt_double(best.validation_accuracy);
    out << "\n";
    return 0;
}

// ---- answer

struct AnswerFlags {
    std::string dataset;
    std::string checkpoint;
    std::string out_path;
    std::size_t jobs = 1;
    std::string cardinality = "auto";
};

std::size_t attr_or(const CheckpointMeta& m, const std::string& key, std::size_t fallback) {
    auto it = m.attributes.find(key);
    return it == m.attributes.end() ? fallback : static_cast<std::size_t>(std::stoull(it->second));
}

int cmd_answer(const AnswerFlags& a, ScoringFlags f, const CLI::App& cmd, Common& common, std::ostream& out) {
    if (a.jobs == 0) throw UsageError("--jobs must be at least 1");
    if (a.cardinality != "auto" && a.cardinality != "gold") throw UsageError("--cardinality must be auto or gold");
    auto items = load_mcqa(a.dataset);
    std::sort(items.begin(), items.end(), [](const MCQAItem& x, const MCQAItem& y) { return x.id < y.id; });
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    // sampling and ablation settings follow the checkpoint unless given
    if (cmd.count("--top-k") == 0) f.top_k = attr_or(ck.meta, "top_k", f.top_k);
    if (cmd.count("--depth") == 0) f.depth = attr_or(ck.meta, "depth", f.depth);
    if (cmd.count("--max-entities") == 0) f.max_entities = attr_or(ck.meta, "max_entities", f.max_entities);
    if (cmd.count("--neighbor-names") == 0) f.neighbor_names = attr_or(ck.meta, "neighbor_names", 0) != 0;
    if (cmd.count("--no-claims") == 0) f.no_claims = attr_or(ck.meta, "use_claims", 1) == 0;
    if (cmd.count("--no-kg") == 0) f.no_kg = attr_or(ck.meta, "use_kg", 1) == 0;

    const KnowledgeGraph kg = load_graph(f.kg_path);
    const auto lemmas = common.lemma_table();
    const SubgraphSampler sampler(kg, sample_config(f), lemmas);
    const auto extractor = make_extractor(f);
    const auto encoder = make_encoder(f.embedding_table, ck.model.dim(), ck.meta.encoder_seed, lemmas);
    const Pipeline pipeline(*extractor, f.no_kg ? nullptr : &sampler, *encoder, {!f.no_claims, !f.no_kg});

    std::vector<Prediction> preds(items.size());
    std::vector<std::string> errors(items.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < items.size(); i = next++) {
            try {
                Prediction p;
                p.id = items[i].id;
                for (const auto& c : items[i].choices) {
                    p.probabilities[c.label] = score_choice(items[i], c.label, pipeline, ck.model).probability;
                }
                const Cardinality k = a.cardinality == "gold" ? Cardinality(items[i].targets.size()) : std::nullopt;
                p.selected = select_answers(p.probabilities, k);
                preds[i] = std::move(p);
            } catch (const std::exception& e) {
                errors[i] = items[i].id + ": " + e.what();
            }
        }
    };
    const std::size_t n_threads = std::min(a.jobs, std::max<std::size_t>(1, items.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
        if (!e.empty()) throw std::runtime_error(e);
    }
    const std::string jsonl = predictions_to_jsonl(preds);
    if (a.out_path.empty()) out << jsonl; else write_file(a.out_path, jsonl);
    return 0;
}

// ---- eval / agreement / difficulty / tfidf

std::vector<RunResult> load_runs(const std::vector<std::string>& paths, const std::string& gold_path) {
    Selections gold;
    if (!gold_path.empty()) gold = gold_selections(load_mcqa(gold_path));
    std::vector<RunResult> runs;
    for (const auto& p : paths) {
        const auto preds = load_predictions(p);
        Selections sel = selections_of(preds);
        const std::string id = std::filesystem::path(p).stem().string();
        if (gold.empty()) runs.push_back({id, std::move(sel), {}});
        else runs.push_back(make_run_result(id, std::move(sel), gold));
    }
    return runs;
}

int cmd_eval(const std::string& pred_path, const std::string& gold_path, const std::string& csv_path, std::ostream& out) {
    const auto items = load_mcqa(gold_path);
    const Selections gold = gold_selections(items);
    const Selections pred = selections_of(load_predictions(pred_path));
    const double acc = exam_accuracy(pred, gold);
    std::map<std::string, Selections> pred_by, gold_by;
    for (const auto& it : items) {
        const std::string t(to_string(it.exam_type));
        pred_by[t][it.id] = pred.at(it.id);
        gold_by[t][it.id] = it.targets;
    }
    std::string csv = "group,items,accuracy\n";
    csv += "all," + std::to_string(gold.size()) + "," + fmt_double(acc) + "\n";
    for (const auto& [t, g] : gold_by) {
        csv += t + "," + std::to_string(g.size()) + "," + fmt_double(exam_accuracy(pred_by[t], g)) + "\n";
    }
    if (!csv_path.empty()) write_file(csv_path, csv);
    out << "items " << gold.size() << " accuracy " << fmt_double(acc) << "\n";
    for (const auto& [t, g] : gold_by) out << "  " << t << " " << fmt_double(exam_accuracy(pred_by[t], g)) << "\n";
    return 0;
}

int cmd_agreement(const std::vector<std::string>& paths, const std::string& categories, std::ostream& out) {
    if (paths.size() < 2) throw UsageError("agreement needs at least two prediction files");
    const auto runs = load_runs(paths, "");
    std::vector<std::string> cats;
    if (categories == "single") cats = single_answer_categories();
    else if (categories == "pooled") cats = pooled_categories();
    else if (categories == "observed") {
        std::set<std::string> seen;
        for (const auto& r : runs)
            for (const auto& [id, s] : r.selected) seen.insert(category_of(s));
        cats.assign(seen.begin(), seen.end());
    } else {
        throw UsageError("--categories must be single, pooled or observed");
    }
    out << "runs " << runs.size() << " appa " << fmt_double(appa(runs)) << " fleiss_kappa "
        << fmt_double(fleiss_kappa(rating_matrix(runs, cats))) << "\n";
    return 0;
}

int cmd_difficulty(const std::vector<std::string>& paths, const std::string& gold_path, const std::string& topics_path,
                   const std::string& csv_path, std::ostream& out) {
    const auto runs = load_runs(paths, gold_path);
    std::map<std::string, std::string> topics;
    if (!topics_path.empty()) {
        topics = load_topics(topics_path);
    } else {
        for (const auto& it : load_mcqa(gold_path)) {
            if (it.domain_tag.empty()) throw std::runtime_error("item " + it.id + " has no domain_tag; pass --topics");
            topics[it.id] = it.domain_tag;
        }
    }
    const DifficultyResult res = difficulty_zscores(runs, topics);
    std::string csv = "topic,items,zscore\n";
    std::vector<std::pair<std::string, double>> rows(res.topic_score.begin(), res.topic_score.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
    for (const auto& [t, z] : rows) csv += t + "," + std::to_string(res.topic_items.at(t)) + "," + fmt_double(z) + "\n";
    if (!csv_path.empty()) write_file(csv_path, csv); else out << csv;
    return 0;
}

int cmd_tfidf(const std::vector<std::string>& corpus_paths, std::size_t top, Common& common, std::ostream& out) {
    std::vector<text::TokenSeq> docs;
    for (const auto& p : corpus_paths) {
        for (const auto& line : read_lines(p)) docs.push_back(text::normalize(line, common.lemma_table()));
    }
    const auto scores = tfidf_scores(docs);
    std::vector<std::pair<std::string, double>> rows(scores.begin(), scores.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
    if (top > 0 && rows.size() > top) rows.resize(top);
    out << "term,score\n";
    for (const auto& [t, s] : rows) out << t << "," << fmt_double(s) << "\n";
    return 0;
}

int cmd_synth(const std::string& dir, const SyntheticConfig& cfg, std::ostream& out) {
    std::filesystem::create_directories(dir);
    const SyntheticFixture fx = make_synthetic_fixture(cfg);
    save_mcqa(fx.train, std::filesystem::path(dir) / "train.jsonl");
    save_mcqa(fx.heldout, std::filesystem::path(dir) / "heldout.jsonl");
    std::string t;
    for (const auto& tr : fx.triplets) t += format_triplet(tr) + "\n";
    write_file((std::filesystem::path(dir) / "triplets.txt").string(), t + "STOP\n");
    out << "train " << fx.train.size() << " heldout " << fx.heldout.size() << " triplets " << fx.triplets.size() << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Graph-augmented multiple-choice answering toolkit", "graf"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--lemmas", common.lemmas_path, "Lemma table (surface<TAB>lemma)");
    app.add_option("--kernels", common.kernels, "Force a kernel backend (scalar|avx2|neon)");

    auto* build = app.add_subcommand("build-kg", "Triplet files -> graph file");
    std::vector<std::string> build_inputs;
    std::string build_out;
    build->add_option("inputs", build_inputs, "Triplet files")->required();
    build->add_option("--out,-o", build_out, "Graph file to write")->required();

    auto* extract = app.add_subcommand("extract", "Corpus chunks -> triplet file through a completion client");
    ExtractFlags ef;
    extract->add_option("corpus", ef.corpus, "Text files, one article per line")->required();
    extract->add_option("--out,-o", ef.out_path, "Triplet file to write")->required();
    extract->add_option("--client", ef.client, "pattern | fixture:DIR | http:URL")->capture_default_str();
    extract->add_option("--model", ef.model_name, "Model name for the HTTP endpoint")->capture_default_str();
    extract->add_option("--lang", ef.lang, "Prompt language (en|ro)")->capture_default_str();
    extract->add_option("--chunk-size", ef.chunk_size)->capture_default_str();
    extract->add_option("--overlap", ef.overlap)->capture_default_str();
    extract->add_option("--dump-prompts", ef.dump_prompts, "Directory receiving every rendered prompt");

    auto* sample = app.add_subcommand("sample", "Query -> subgraph dump (JSON)");
    ScoringFlags sf;
    std::string query, sample_out;
    sample->add_option("--kg", sf.kg_path)->required();
    sample->add_option("--query", query)->required();
    sample->add_option("--top-k", sf.top_k)->capture_default_str();
    sample->add_option("--depth", sf.depth)->capture_default_str();
    sample->add_option("--max-entities", sf.max_entities)->capture_default_str();
    sample->add_flag("--neighbor-names", sf.neighbor_names);
    sample->add_option("--out,-o", sample_out);

    auto* trn = app.add_subcommand("train", "Dataset + graph -> checkpoint and CSV log");
    TrainFlags tf;
    ScoringFlags trf;
    add_scoring_flags(trn, trf);
    trn->add_option("--dataset", tf.dataset)->required();
    trn->add_option("--validation", tf.validation, "Validation dataset");
    trn->add_option("--checkpoint,--out", tf.out_path, "Checkpoint to write")->required();
    trn->add_option("--log", tf.log_path, "Per-epoch CSV log");
    trn->add_option("--lr", tf.lr)->capture_default_str();
    trn->add_option("--epochs", tf.epochs)->capture_default_str();
    trn->add_option("--loss", tf.loss, "bce | cosine")->capture_default_str();
    trn->add_option("--dim", tf.dim)->capture_default_str();
    trn->add_option("--heads", tf.heads)->capture_default_str();
    trn->add_option("--weight-decay", tf.weight_decay)->capture_default_str();
    trn->add_option("--checkpoint-every", tf.checkpoint_every, "Also save every N epochs")->capture_default_str();
    trn->add_option("--seed", common.seed)->capture_default_str();

    auto* ans = app.add_subcommand("answer", "Dataset + graph + checkpoint -> predictions JSONL");
    AnswerFlags af;
    ScoringFlags asf;
    add_scoring_flags(ans, asf);
    ans->add_option("--dataset", af.dataset)->required();
    ans->add_option("--checkpoint", af.checkpoint)->required();
    ans->add_option("--out,-o", af.out_path, "Predictions file (stdout if omitted)");
    ans->add_option("--jobs,-j", af.jobs)->capture_default_str();
    ans->add_option("--cardinality", af.cardinality, "auto | gold")->capture_default_str();
    ans->add_option("--seed", common.seed, "Unused by scoring; accepted for uniformity")->capture_default_str();

    auto* ev = app.add_subcommand("eval", "Predictions + gold -> accuracy report");
    std::string ev_pred, ev_gold, ev_csv;
    ev->add_option("--predictions", ev_pred)->required();
    ev->add_option("--dataset", ev_gold, "Gold dataset")->required();
    ev->add_option("--csv", ev_csv, "Write the report as CSV");

    auto* agr = app.add_subcommand("agreement", "Prediction files -> APPA and Fleiss' kappa");
    std::vector<std::string> agr_paths;
    std::string agr_cats = "pooled";
    agr->add_option("predictions", agr_paths)->required();
    agr->add_option("--categories", agr_cats, "single | pooled | observed")->capture_default_str();

    auto* dif = app.add_subcommand("difficulty", "Prediction files + topics -> per-topic z-scores");
    std::vector<std::string> dif_paths;
    std::string dif_gold, dif_topics, dif_csv;
    dif->add_option("predictions", dif_paths)->required();
    dif->add_option("--dataset", dif_gold, "Gold dataset")->required();
    dif->add_option("--topics", dif_topics, "id<TAB>topic file (default: domain_tag)");
    dif->add_option("--csv", dif_csv);

    auto* tfi = app.add_subcommand("tfidf", "Corpus -> term scores");
    std::vector<std::string> tf_corpus;
    std::size_t tf_top = 0;
    tfi->add_option("corpus", tf_corpus, "Text files, one document per line")->required();
    tfi->add_option("--top", tf_top, "Keep the N highest scores (0 = all)")->capture_default_str();

    auto* syn = app.add_subcommand("synth", "Write the synthetic toy exam and its graph");
    std::string syn_dir;
    SyntheticConfig syn_cfg;
    syn->add_option("--out-dir", syn_dir)->required();
    syn->add_option("--train", syn_cfg.train_items)->capture_default_str();
    syn->add_option("--heldout", syn_cfg.heldout_items)->capture_default_str();
    syn->add_option("--seed", syn_cfg.seed)->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "graf: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (!common.kernels.empty()) kernels::set_backend(kernels::parse_backend(common.kernels));
        if (build->parsed()) return cmd_build_kg(build_inputs, build_out, out);
        if (extract->parsed()) return cmd_extract(ef, common, out);
        if (sample->parsed()) return cmd_sample(sf, query, sample_out, common, out);
        if (trn->parsed()) return cmd_train(tf, trf, common, out);
        if (ans->parsed()) return cmd_answer(af, asf, *ans, common, out);
        if (ev->parsed()) return cmd_eval(ev_pred, ev_gold, ev_csv, out);
        if (agr->parsed()) return cmd_agreement(agr_paths, agr_cats, out);
        if (dif->parsed()) return cmd_difficulty(dif_paths, dif_gold, dif_topics, dif_csv, out);
        if (tfi->parsed()) return cmd_tfidf(tf_corpus, tf_top, common, out);
        if (syn->parsed()) return cmd_synth(syn_dir, syn_cfg, out);
    } catch (const UsageError& e) {
        err << "graf: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "graf: error: " << e.what() << "\n";
        return 1;
    }
    err << app.help();
    return 2;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace graf
