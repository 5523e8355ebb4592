#include "kgrev/service.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>

namespace kgrev {

using nlohmann::json;

namespace {

ServiceReply error_reply(int status, const std::string& message,
                         std::optional<int> retry_after = std::nullopt) {
    json body;
    body["error"] = message;
    if (retry_after) body["retry_after"] = *retry_after;
    return {status, body.dump()};
}

std::pair<std::string, int> split_listen(const std::string& listen) {
    auto colon = listen.rfind(':');
    if (colon == std::string::npos) return {listen, 8080};
    return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
}

}  // namespace

struct ScoreService::Impl {
    ServiceConfig config;
    ContentScorer content;
    GbdtClassifier final_model;
    LabelMap labels;
    std::shared_ptr<RevisionSource> source;
    EntityHistoryIndex empty_history;
    httplib::Server server;

    RevisionRecord record_from_inline(const json& req, const EntityDocument& current,
                                      const std::optional<EntityDocument>& parent) {
        RevisionRecord record;
        record.entity_id = current.id;
        if (req.contains("metadata") && req["metadata"].is_object()) {
            const auto& meta = req["metadata"];
            record.revision_id = meta.value("revision_id", int64_t(0));
            if (meta.contains("timestamp")) {
                record.timestamp = parse_instant(meta["timestamp"].get<std::string>());
            }
            if (meta.contains("editor")) {
                record.editor = editor_from_json_text(meta["editor"].dump());
            }
            if (meta.contains("tags")) {
                for (const auto& t : meta["tags"]) record.tags.insert(t.get<std::string>());
            }
        }
        record.deltas = diff_entities(parent, current);
        return record;
    }

    json score_record(const RevisionRecord& record, const EntityHistoryIndex& history) {
        RevisionScore scored = score_revision(content, final_model, labels, record, history);
        json out;
        out["revision_id"] = record.revision_id;
        out["entity_id"] = record.entity_id;
        out["probability"] = scored.probability;
        out["pooled_content_score"] =
            scored.pooled_content ? json(*scored.pooled_content) : json(nullptr);
        json changes = json::array();
        for (size_t i = 0; i < scored.changes.size(); ++i) {
            changes.push_back({{"full_text", scored.changes[i].full_text},
                               {"score", scored.change_scores[i]}});
        }
        out["changes"] = std::move(changes);
        out["model_versions"] = {{"content", content.model_version()},
                                 {"final", final_model.model_version()},
                                 {"template", content.template_version()}};
        return out;
    }

    ServiceReply score_inline(const json& req) {
        if (!req.contains("current") || !req["current"].is_object()) {
            return error_reply(400, "inline request needs a 'current' entity object");
        }
        EntityDocument current;
        std::optional<EntityDocument> parent;
        try {
            current = parse_entity(req["current"].dump());
            if (req.contains("parent") && !req["parent"].is_null()) {
                if (!req["parent"].is_object()) {
                    return error_reply(400, "'parent' must be an entity object or null");
                }
                parent = parse_entity(req["parent"].dump());
            }
        } catch (const Error& e) {
            return error_reply(400, e.what());
        }

        try {
            RevisionRecord record = record_from_inline(req, current, parent);
            EntityHistoryIndex history;
            if (req.contains("metadata") && req["metadata"].contains("previous_timestamp")) {
                RevisionRecord prior;
                prior.entity_id = record.entity_id;
                prior.timestamp =
                    parse_instant(req["metadata"]["previous_timestamp"].get<std::string>());
                history.add({prior});
            }
            return {200, score_record(record, history).dump()};
        } catch (const EntityMismatch& e) {
            return error_reply(422, e.what());
        } catch (const Error& e) {
            return error_reply(400, e.what());
        }
    }

    ServiceReply score_fetch(const json& req) {
        if (!source) return error_reply(400, "fetch mode is not configured");
        if (!req.contains("revision_id") || !req["revision_id"].is_number_integer()) {
            return error_reply(400, "fetch request needs an integer 'revision_id'");
        }
        try {
            FetchedRevision fetched = source->fetch(req["revision_id"].get<int64_t>());
            EntityDocument current = parse_entity(fetched.current_json);
            std::optional<EntityDocument> parent;
            if (fetched.parent_json) parent = parse_entity(*fetched.parent_json);
            RevisionRecord record = fetched.meta;
            record.entity_id = current.id;
            record.deltas = diff_entities(parent, current);
            return {200, score_record(record, empty_history).dump()};
        } catch (const NotFound& e) {
            return error_reply(422, e.what());
        } catch (const EntityMismatch& e) {
            return error_reply(422, e.what());
        } catch (const MalformedDocument& e) {
            return error_reply(502, std::string("upstream content unusable: ") + e.what());
        } catch (const RateLimited& e) {
            return error_reply(502, e.what(), 1);
        } catch (const UpstreamTimeout& e) {
            return error_reply(504, e.what());
        } catch (const UpstreamError& e) {
            return error_reply(502, e.what(), 1);
        }
    }
};

ScoreService::ScoreService(const ServiceConfig& config, std::shared_ptr<RevisionSource> source)
    : impl_(std::make_unique<Impl>()) {
    impl_->config = config;
    impl_->content = ContentScorer::load(config.content_model_path);
    impl_->final_model = GbdtClassifier::load(config.final_model_path);
    if (!config.label_map_path.empty()) {
        impl_->labels = LabelMap::load_tsv(config.label_map_path);
    }
    if (source) {
        impl_->source = std::move(source);
    } else if (config.upstream) {
        impl_->source = std::make_shared<MediaWikiClient>(*config.upstream);
    }

    int workers = std::max(1, config.workers);
    impl_->server.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
    impl_->server.set_payload_max_length(config.max_body_bytes);
    // Nagle + delayed ACK stalls keep-alive request streams by ~40ms.
    impl_->server.set_tcp_nodelay(true);
    impl_->server.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
        auto start = std::chrono::steady_clock::now();
        ServiceReply reply = handle_score(req.body);
        if (reply.status == 200) {
            json body = json::parse(reply.body);
            body["latency_ms"] = std::chrono::duration<double, std::milli>(
                                     std::chrono::steady_clock::now() - start)
                                     .count();
            reply.body = body.dump();
        }
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    });
    impl_->server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"status\":\"ok\"}", "application/json");
    });
    impl_->server.Get("/modelinfo", [this](const httplib::Request&, httplib::Response& res) {
        ServiceReply reply = handle_modelinfo();
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    });
}

ScoreService::~ScoreService() {
    if (impl_->server.is_running()) impl_->server.stop();
}

ServiceReply ScoreService::handle_score(const std::string& request_body) {
    json req = json::parse(request_body, nullptr, false);
    if (req.is_discarded() || !req.is_object()) {
        return error_reply(400, "request body is not a JSON object");
    }
    std::string mode = req.value("mode", req.contains("revision_id") && !req.contains("current")
                                             ? "fetch"
                                             : "inline");
    if (mode == "inline") return impl_->score_inline(req);
    if (mode == "fetch") return impl_->score_fetch(req);
    return error_reply(400, "unknown mode '" + mode + "'");
}

ServiceReply ScoreService::handle_modelinfo() const {
    json out;
    out["content_model"] = impl_->content.model_version();
    out["final_model"] = impl_->final_model.model_version();
    out["template"] = impl_->content.template_version();
    out["best_iteration"] = impl_->final_model.best_iteration();
    out["feature_names"] = impl_->final_model.feature_names();
    out["fetch_mode"] = impl_->source != nullptr;
    return {200, out.dump()};
}

int ScoreService::bind() {
    auto [host, port] = split_listen(impl_->config.listen);
    if (port == 0) {
        port_ = impl_->server.bind_to_any_port(host);
    } else {
        port_ = impl_->server.bind_to_port(host, port) ? port : -1;
    }
    if (port_ < 0) throw IoError("cannot bind to " + impl_->config.listen);
    return port_;
}

bool ScoreService::run() { return impl_->server.listen_after_bind(); }

void ScoreService::stop() { impl_->server.stop(); }

}  // namespace kgrev
