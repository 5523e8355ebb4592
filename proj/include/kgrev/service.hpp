#pragma once
// HTTP scoring service: POST /score (inline entity pair or API-backed
// fetch by revision id), GET /healthz, GET /modelinfo. Models and label
// map are loaded once at startup and shared immutably across request
// threads; the inline path never performs network I/O.

#include <atomic>
#include <memory>
#include <optional>
#include <string>

#include "kgrev/api_client.hpp"
#include "kgrev/pipeline.hpp"

namespace kgrev {

struct ServiceConfig {
    std::string listen = "127.0.0.1:8080";
    std::string content_model_path;
    std::string final_model_path;
    std::string label_map_path;  // optional; empty map when unset
    size_t max_body_bytes = 4 * 1024 * 1024;
    int workers = 4;
    std::optional<ApiClientConfig> upstream;  // unset: fetch mode disabled
};

// One handled request, decoupled from the HTTP layer for testing.
struct ServiceReply {
    int status = 200;
    std::string body;  // JSON
};

class ScoreService {
public:
    // Loads both models (and the label map when configured). A non-null
    // `source` overrides the upstream client; passing one with
    // config.upstream unset enables fetch mode against it.
    ScoreService(const ServiceConfig& config, std::shared_ptr<RevisionSource> source = nullptr);
    ~ScoreService();

    ServiceReply handle_score(const std::string& request_body);
    ServiceReply handle_modelinfo() const;

    // Binds to `listen` (port 0 picks a free port; the chosen one is
    // returned) and serves until stop(). Blocking.
    int bind();
    bool run();
    void stop();
    int port() const { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = -1;
};

}  // namespace kgrev
