#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <csignal>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

#include "kgrev/api_client.hpp"
#include "kgrev/evaluation.hpp"
#include "kgrev/pipeline.hpp"
#include "kgrev/serde.hpp"
#include "kgrev/service.hpp"

using nlohmann::json;
using namespace kgrev;

namespace {

ScoreService* g_service = nullptr;

void handle_signal(int) {
    if (g_service) g_service->stop();
}

LabelMap load_labels(const std::string& path) {
    return path.empty() ? LabelMap{} : LabelMap::load_tsv(path);
}

std::vector<RevisionRecord> read_corpora(const std::vector<std::string>& paths) {
    std::vector<RevisionRecord> all;
    for (const auto& p : paths) {
        auto part = read_corpus(p);
        all.insert(all.end(), part.begin(), part.end());
    }
    return all;
}

int cmd_ingest(const std::string& input, const std::string& output) {
    std::ostringstream out;
    size_t n = 0;
    for (const auto& line : read_lines(input)) {
        json raw = json::parse(line, nullptr, false);
        if (raw.is_discarded() || !raw.is_object()) {
            throw IoError("ingest line " + std::to_string(n + 1) + " is not a JSON object");
        }
        EntityDocument current = parse_entity(raw.at("current_content").dump());
        std::optional<EntityDocument> parent;
        if (raw.contains("parent_content") && !raw["parent_content"].is_null()) {
            parent = parse_entity(raw["parent_content"].dump());
        }

        json canonical = raw;
        canonical.erase("current_content");
        canonical.erase("parent_content");
        if (!canonical.contains("entity_id")) canonical["entity_id"] = current.id;
        canonical["deltas"] = deltas_to_json(diff_entities(parent, current));
        RevisionRecord record = record_from_json_line(canonical.dump());
        out << record_to_json_line(record) << '\n';
        ++n;
    }
    write_file(output, out.str());
    std::cout << json{{"records", n}, {"output", output}}.dump() << "\n";
    return 0;
}

int cmd_prepare(const std::string& input, const std::string& out_dir, const std::string& tag,
                int ratio, double split_ratio, const std::string& cutoff_iso, int holdout_days,
                uint64_t seed) {
    auto records = read_corpus(input);
    json stats;
    stats["input"] = records.size();

    auto human = filter_human_ui_edits(records, tag);
    stats["human_ui"] = human.size();

    auto no_self = filter_self_reverts(human);
    stats["after_self_revert_filter"] = no_self.size();

    EditWarStats war;
    auto filtered = filter_edit_wars(no_self, &war);
    stats["after_edit_war_filter"] = filtered.size();
    stats["war_removed_records"] = war.removed_records;
    stats["war_removed_of_all"] =
        war.input_records ? double(war.removed_records) / double(war.input_records) : 0.0;
    size_t reverted_removed = (human.size() - no_self.size()) + war.removed_reverted;
    size_t reverted_in = 0;
    for (const auto& r : human) reverted_in += size_t(r.reverted);
    stats["reverted_removed_of_reverted"] =
        reverted_in ? double(reverted_removed) / double(reverted_in) : 0.0;

    auto balanced = balance_negatives(filtered, ratio, splitmix64(seed));
    stats["balanced"] = balanced.size();

    Instant cutoff;
    if (!cutoff_iso.empty()) {
        cutoff = parse_instant(cutoff_iso);
    } else {
        Instant newest = 0;
        for (const auto& r : balanced) newest = std::max(newest, r.timestamp);
        cutoff = newest - int64_t(holdout_days) * 86400;
    }
    stats["cutoff"] = format_instant(cutoff);

    DatasetSplit split = split_dataset(balanced, cutoff, split_ratio, splitmix64(seed + 1));
    write_corpus(out_dir + "/lmc_train.jsonl", split.lmc_train);
    write_corpus(out_dir + "/final_train.jsonl", split.final_train);
    write_corpus(out_dir + "/holdout.jsonl", split.holdout);
    stats["lmc_train"] = split.lmc_train.size();
    stats["final_train"] = split.final_train.size();
    stats["holdout"] = split.holdout.size();
    std::cout << stats.dump(2) << "\n";
    return 0;
}

int cmd_train_content(const std::string& train_path, const std::string& labels_path,
                      const std::string& output, ContentScorerConfig config) {
    LabelMap labels = load_labels(labels_path);
    std::vector<ChangeSample> samples;
    for (const auto& record : read_corpus(train_path)) {
        for (const auto& change : textualize_revision(record.deltas, labels)) {
            samples.push_back({change, record.reverted ? 1 : 0});
        }
    }
    auto balanced = balance_lmc_training(samples, splitmix64(config.seed ^ 0x1c));
    ContentScorer model = ContentScorer::train(balanced, config);
    model.save(output);
    std::cout << json{{"samples", samples.size()},
                      {"balanced_samples", balanced.size()},
                      {"best_epoch", model.best_epoch()},
                      {"validation_loss", model.validation_loss()},
                      {"output", output}}
                     .dump(2)
              << "\n";
    return 0;
}

FeatureMask parse_mask(const std::string& name) {
    if (name == "full") return FeatureMask::Full;
    if (name == "metadata") return FeatureMask::MetadataOnly;
    if (name == "content") return FeatureMask::ContentOnly;
    throw IoError("unknown feature mask '" + name + "'");
}

int cmd_train_final(const std::string& train_path, const std::string& content_model_path,
                    const std::string& labels_path, const std::string& output,
                    const std::vector<std::string>& history_paths, int validation_days,
                    const std::string& mask_name, GbdtConfig config) {
    LabelMap labels = load_labels(labels_path);
    ContentScorer content = ContentScorer::load(content_model_path);
    auto records = read_corpus(train_path);

    EntityHistoryIndex history;
    history.add(records);
    if (!history_paths.empty()) history.add(read_corpora(history_paths));

    auto [head, tail] = split_time_tail(records, int64_t(validation_days) * 86400);
    if (head.empty() || tail.empty()) {
        throw EmptyPartition("validation tail of " + std::to_string(validation_days) +
                             " days leaves an empty partition");
    }
    FinalTrainingData train = build_final_rows(head, content, labels, history);
    FinalTrainingData valid = build_final_rows(tail, content, labels, history);
    GbdtClassifier model = train_final_model(train, valid, config, parse_mask(mask_name));
    model.save(output);
    std::cout << json{{"train_rows", train.rows.size()},
                      {"validation_rows", valid.rows.size()},
                      {"best_iteration", model.best_iteration()},
                      {"positive_weight", model.positive_weight()},
                      {"output", output}}
                     .dump(2)
              << "\n";
    return 0;
}

int cmd_score(const std::string& input, const std::string& content_model_path,
              const std::string& final_model_path, const std::string& labels_path,
              const std::string& output, const std::vector<std::string>& history_paths) {
    LabelMap labels = load_labels(labels_path);
    ContentScorer content = ContentScorer::load(content_model_path);
    GbdtClassifier final_model = GbdtClassifier::load(final_model_path);
    auto records = read_corpus(input);

    EntityHistoryIndex history;
    history.add(records);
    if (!history_paths.empty()) history.add(read_corpora(history_paths));

    std::ostringstream out;
    for (const auto& record : records) {
        RevisionScore scored = score_revision(content, final_model, labels, record, history);
        json line;
        line["score"] = scored.probability;
        line["label"] = record.reverted ? 1 : 0;
        line["groups"] = standard_groups(record);
        line["revision_id"] = record.revision_id;
        out << line.dump() << '\n';
    }
    write_file(output, out.str());
    std::cout << json{{"scored", records.size()}, {"output", output}}.dump() << "\n";
    return 0;
}

int cmd_evaluate(const std::string& scored_path, const std::string& output,
                 std::vector<double> recalls, int resamples, int resample_size, double threshold,
                 const std::string& pr_table_path, uint64_t seed) {
    ScoredDataset data = read_scored(scored_path);

    std::vector<FairnessGroupSpec> specs;
    std::vector<std::string> slices;
    auto has_both = [&](const std::string& slice, const std::string& a, const std::string& b) {
        bool seen_a = false, seen_b = false;
        for (const auto& row : data.rows) {
            auto it = row.groups.find(slice);
            if (it == row.groups.end()) continue;
            seen_a |= it->second == a;
            seen_b |= it->second == b;
        }
        return seen_a && seen_b;
    };
    for (const auto& slice : {"editor", "experience", "content", "language"}) {
        bool present = false;
        for (const auto& row : data.rows) present |= row.groups.count(slice) > 0;
        if (present) slices.push_back(slice);
    }
    if (has_both("editor", "registered", "anonymous")) {
        specs.push_back({"editor", "registered", "anonymous", threshold});
    }
    if (has_both("experience", "experienced", "new")) {
        specs.push_back({"experience", "experienced", "new", threshold});
    }

    EvaluationReport report =
        sliced_report(data, specs, slices, recalls, {resamples, resample_size}, seed);
    std::string text = report_to_json(report);
    if (!output.empty()) write_file(output, text);
    std::cout << text << "\n";

    if (!pr_table_path.empty()) {
        json table = json::array();
        for (const auto& p : precision_recall_table(data)) {
            table.push_back(
                {{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall}});
        }
        write_file(pr_table_path, table.dump(2));
    }
    return 0;
}

int cmd_diff(const std::string& parent_path, const std::string& current_path, bool creation) {
    std::optional<EntityDocument> parent;
    if (!creation) parent = parse_entity(read_file(parent_path));
    EntityDocument current = parse_entity(read_file(current_path));
    std::cout << deltas_to_json(diff_entities(parent, current)).dump(2) << "\n";
    return 0;
}

int cmd_textualize(const std::string& deltas_path, const std::string& labels_path) {
    LabelMap labels = load_labels(labels_path);
    json arr = json::parse(read_file(deltas_path), nullptr, false);
    if (arr.is_discarded()) throw IoError("deltas file is not valid JSON");
    for (const auto& change : textualize_revision(deltas_from_json(arr), labels)) {
        std::cout << change.full_text << "\n";
    }
    return 0;
}

int cmd_serve(ServiceConfig config) {
    ScoreService service(config);
    g_service = &service;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    int port = service.bind();
    std::cout << json{{"listening", config.listen}, {"port", port}}.dump() << std::endl;
    service.run();
    g_service = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Revision scoring for collaborative knowledge-graph edits"};
    app.set_config("--config")->envname("KGREV_CONFIG");
    app.require_subcommand(1);
    uint64_t seed = 7;
    app.add_option("--seed", seed, "Master RNG seed")->envname("KGREV_SEED")->capture_default_str();

    std::function<int()> action;

    auto* ingest = app.add_subcommand("ingest", "Adapt raw revision JSON-Lines to the corpus format");
    {
        auto input = std::make_shared<std::string>();
        auto output = std::make_shared<std::string>();
        ingest->add_option("--input", *input, "Raw JSON-Lines file")->required();
        ingest->add_option("--output", *output, "Corpus output path")->required();
        ingest->callback([=, &action] { action = [=] { return cmd_ingest(*input, *output); }; });
    }

    auto* prepare = app.add_subcommand("prepare", "Filter, balance, and split a corpus");
    {
        auto input = std::make_shared<std::string>();
        auto out_dir = std::make_shared<std::string>(".");
        auto tag = std::make_shared<std::string>(std::string(kDefaultHumanUiTag));
        auto ratio = std::make_shared<int>(5);
        auto split_ratio = std::make_shared<double>(0.8);
        auto cutoff = std::make_shared<std::string>();
        auto holdout_days = std::make_shared<int>(90);
        prepare->add_option("--input", *input, "Corpus JSON-Lines file")->required();
        prepare->add_option("--out-dir", *out_dir, "Directory for the three partitions")
            ->capture_default_str();
        prepare->add_option("--tag", *tag, "Human-UI tag to keep")->capture_default_str();
        prepare->add_option("--ratio", *ratio, "Negatives per positive")->capture_default_str();
        prepare->add_option("--split", *split_ratio, "Train share for the content-scorer partition")
            ->capture_default_str();
        prepare->add_option("--cutoff", *cutoff, "Holdout cutoff (ISO-8601); wins over --holdout-days");
        prepare->add_option("--holdout-days", *holdout_days, "Holdout tail length in days")
            ->capture_default_str();
        prepare->callback([=, &action, &seed] {
            action = [=, &seed] {
                return cmd_prepare(*input, *out_dir, *tag, *ratio, *split_ratio, *cutoff,
                                   *holdout_days, seed);
            };
        });
    }

    auto* train_content = app.add_subcommand("train-content", "Train the per-change content scorer");
    {
        auto train = std::make_shared<std::string>();
        auto labels = std::make_shared<std::string>();
        auto output = std::make_shared<std::string>();
        auto config = std::make_shared<ContentScorerConfig>();
        config->feature_bits = 18;
        train_content->add_option("--train", *train, "Training corpus")->required();
        train_content->add_option("--labels", *labels, "Label map TSV")->envname("KGREV_LABELS");
        train_content->add_option("--output", *output, "Model output path")->required();
        train_content->add_option("--bits", config->feature_bits, "log2 of the feature space")
            ->capture_default_str();
        train_content->add_option("--epochs", config->epochs, "Training epochs")
            ->capture_default_str();
        train_content->add_option("--learning-rate", config->learning_rate, "SGD learning rate")
            ->capture_default_str();
        train_content
            ->add_option("--validation-fraction", config->validation_fraction,
                         "Held-out slice for checkpoint selection")
            ->capture_default_str();
        train_content->callback([=, &action, &seed] {
            action = [=, &seed] {
                ContentScorerConfig cfg = *config;
                cfg.seed = seed;
                return cmd_train_content(*train, *labels, *output, cfg);
            };
        });
    }

    auto* train_final = app.add_subcommand("train-final", "Train the final revision classifier");
    {
        auto train = std::make_shared<std::string>();
        auto content_model = std::make_shared<std::string>();
        auto labels = std::make_shared<std::string>();
        auto output = std::make_shared<std::string>();
        auto history = std::make_shared<std::vector<std::string>>();
        auto validation_days = std::make_shared<int>(90);
        auto mask = std::make_shared<std::string>("full");
        auto config = std::make_shared<GbdtConfig>();
        config->iterations = 500;
        train_final->add_option("--train", *train, "Training corpus")->required();
        train_final->add_option("--content-model", *content_model, "Trained content scorer")
            ->envname("KGREV_CONTENT_MODEL")
            ->required();
        train_final->add_option("--labels", *labels, "Label map TSV")->envname("KGREV_LABELS");
        train_final->add_option("--output", *output, "Model output path")->required();
        train_final->add_option("--history", *history,
                                "Extra corpora for previous-revision lookups");
        train_final
            ->add_option("--validation-days", *validation_days,
                         "Time tail used as the validation set")
            ->capture_default_str();
        train_final->add_option("--mask", *mask, "Feature mask: full|metadata|content")
            ->capture_default_str();
        train_final->add_option("--iterations", config->iterations, "Boosting iterations")
            ->capture_default_str();
        train_final->add_option("--learning-rate", config->learning_rate, "Shrinkage per tree")
            ->capture_default_str();
        train_final->add_option("--depth", config->max_depth, "Maximum tree depth")
            ->capture_default_str();
        train_final->callback([=, &action] {
            action = [=] {
                return cmd_train_final(*train, *content_model, *labels, *output, *history,
                                       *validation_days, *mask, *config);
            };
        });
    }

    auto* score = app.add_subcommand("score", "Score a corpus with trained models");
    {
        auto input = std::make_shared<std::string>();
        auto content_model = std::make_shared<std::string>();
        auto final_model = std::make_shared<std::string>();
        auto labels = std::make_shared<std::string>();
        auto output = std::make_shared<std::string>();
        auto history = std::make_shared<std::vector<std::string>>();
        score->add_option("--input", *input, "Corpus to score")->required();
        score->add_option("--content-model", *content_model, "Trained content scorer")
            ->envname("KGREV_CONTENT_MODEL")
            ->required();
        score->add_option("--final-model", *final_model, "Trained final classifier")
            ->envname("KGREV_FINAL_MODEL")
            ->required();
        score->add_option("--labels", *labels, "Label map TSV")->envname("KGREV_LABELS");
        score->add_option("--output", *output, "Scored JSON-Lines output")->required();
        score->add_option("--history", *history, "Extra corpora for previous-revision lookups");
        score->callback([=, &action] {
            action = [=] {
                return cmd_score(*input, *content_model, *final_model, *labels, *output, *history);
            };
        });
    }

    auto* evaluate = app.add_subcommand("evaluate", "Compute the metric report for scored data");
    {
        auto scored = std::make_shared<std::string>();
        auto output = std::make_shared<std::string>();
        auto recalls = std::make_shared<std::vector<double>>(
            std::vector<double>{0.5, 0.75, 0.9, 0.95, 0.98});
        auto resamples = std::make_shared<int>(10000);
        auto resample_size = std::make_shared<int>(10000);
        auto threshold = std::make_shared<double>(0.5);
        auto pr_table = std::make_shared<std::string>();
        evaluate->add_option("--scored", *scored, "Scored JSON-Lines file")->required();
        evaluate->add_option("--output", *output, "Report JSON output path");
        evaluate->add_option("--recalls", *recalls, "Recall levels for filter rates")
            ->capture_default_str();
        evaluate->add_option("--resamples", *resamples, "Bootstrap resample count")
            ->capture_default_str();
        evaluate->add_option("--resample-size", *resample_size, "Rows per bootstrap resample")
            ->capture_default_str();
        evaluate->add_option("--threshold", *threshold, "Decision threshold for flag rates")
            ->capture_default_str();
        evaluate->add_option("--pr-table", *pr_table, "Optional precision/recall table output");
        evaluate->callback([=, &action, &seed] {
            action = [=, &seed] {
                return cmd_evaluate(*scored, *output, *recalls, *resamples, *resample_size,
                                    *threshold, *pr_table, seed);
            };
        });
    }

    auto* diff = app.add_subcommand("diff", "Diff two entity JSON files");
    {
        auto parent = std::make_shared<std::string>();
        auto current = std::make_shared<std::string>();
        auto creation = std::make_shared<bool>(false);
        diff->add_option("parent", *parent, "Parent entity JSON (omit with --creation)");
        diff->add_option("current", *current, "Current entity JSON");
        diff->add_flag("--creation", *creation, "Treat as a page creation (no parent)");
        diff->callback([=, &action] {
            if (*creation && current->empty()) {
                *current = *parent;
                parent->clear();
            }
            if (current->empty() || (!*creation && parent->empty())) {
                throw CLI::RequiredError("diff: parent and current entity files");
            }
            action = [=] { return cmd_diff(*parent, *current, *creation); };
        });
    }

    auto* textualize = app.add_subcommand("textualize", "Render deltas as scorer input strings");
    {
        auto deltas = std::make_shared<std::string>();
        auto labels = std::make_shared<std::string>();
        textualize->add_option("--deltas", *deltas, "JSON array of deltas")->required();
        textualize->add_option("--labels", *labels, "Label map TSV")->envname("KGREV_LABELS");
        textualize->callback([=, &action] {
            action = [=] { return cmd_textualize(*deltas, *labels); };
        });
    }

    auto* serve = app.add_subcommand("serve", "Run the HTTP scoring service");
    {
        auto config = std::make_shared<ServiceConfig>();
        auto upstream = std::make_shared<std::string>();
        auto rate_limit = std::make_shared<double>(5.0);
        serve->add_option("--listen", config->listen, "host:port to bind")
            ->envname("KGREV_LISTEN")
            ->capture_default_str();
        serve->add_option("--content-model", config->content_model_path, "Trained content scorer")
            ->envname("KGREV_CONTENT_MODEL")
            ->required();
        serve->add_option("--final-model", config->final_model_path, "Trained final classifier")
            ->envname("KGREV_FINAL_MODEL")
            ->required();
        serve->add_option("--labels", config->label_map_path, "Label map TSV")
            ->envname("KGREV_LABELS");
        serve->add_option("--upstream", *upstream, "MediaWiki base URL enabling fetch mode")
            ->envname("KGREV_UPSTREAM");
        serve->add_option("--rate-limit", *rate_limit, "Upstream requests per second")
            ->envname("KGREV_RATE_LIMIT")
            ->capture_default_str();
        serve->add_option("--workers", config->workers, "Request worker threads")
            ->capture_default_str();
        serve->add_option("--max-body", config->max_body_bytes, "Largest accepted request body")
            ->capture_default_str();
        serve->callback([=, &action] {
            action = [=] {
                ServiceConfig cfg = *config;
                if (!upstream->empty()) {
                    ApiClientConfig api;
                    api.base_url = *upstream;
                    api.requests_per_second = *rate_limit;
                    cfg.upstream = api;
                }
                return cmd_serve(cfg);
            };
        });
    }

    // Flags > environment > config file. CLI11 applies the config file
    // before environment variables, so env-bound options are injected as
    // argv entries whenever the flag itself is absent.
    std::vector<std::string> args(argv + 1, argv + argc);
    auto has_flag = [&args](const std::string& name) {
        std::string full = "--" + name;
        for (const auto& a : args) {
            if (a == full || a.rfind(full + "=", 0) == 0) return true;
        }
        return false;
    };
    auto env_args = [&has_flag](CLI::App* cmd) {
        std::vector<std::string> extra;
        for (CLI::Option* opt : cmd->get_options()) {
            if (opt == cmd->get_config_ptr() || opt->get_envname().empty()) continue;
            if (opt->get_lnames().empty()) continue;
            const std::string& lname = opt->get_lnames().front();
            const char* value = std::getenv(opt->get_envname().c_str());
            if (!value || !*value || has_flag(lname)) continue;
            extra.push_back("--" + lname + "=" + value);
        }
        return extra;
    };
    CLI::App* active = nullptr;
    for (const auto& a : args) {
        if ((active = app.get_subcommand_no_throw(a)) != nullptr) break;
    }
    auto app_env = env_args(&app);
    args.insert(args.begin(), app_env.begin(), app_env.end());
    if (active) {
        for (auto& extra : env_args(active)) args.push_back(std::move(extra));
    }

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return action ? action() : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
