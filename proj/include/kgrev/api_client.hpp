#pragma once
// Read-only client for the MediaWiki action API: fetches a revision's
// content, its parent's content, and editor metadata, with an in-memory
// cache and polite rate limiting. The RevisionSource interface is what
// the scoring service depends on, so tests can substitute a local stub
// and the inline path can prove it never touches the network.

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "kgrev/corpus.hpp"

namespace kgrev {

// Spaces calls so at most `per_second` start per second, sleeping the
// caller as needed. Thread-safe.
class RateLimiter {
public:
    explicit RateLimiter(double per_second);

    void acquire();

private:
    std::chrono::steady_clock::duration interval_;
    std::chrono::steady_clock::time_point next_;
    std::mutex mu_;
};

struct FetchedRevision {
    RevisionRecord meta;  // ids, timestamp, editor, tags; deltas empty
    std::string current_json;
    std::optional<std::string> parent_json;  // absent for page creations
};

class RevisionSource {
public:
    virtual ~RevisionSource() = default;

    virtual FetchedRevision fetch(int64_t revision_id) = 0;
};

struct ApiClientConfig {
    std::string base_url = "https://www.wikidata.org";
    std::string api_path = "/w/api.php";
    std::string user_agent = "kgrev/1.0 (revision scoring; contact: ops)";
    double requests_per_second = 5.0;
    int timeout_ms = 10000;
    bool fetch_editor_details = true;  // extra users query per distinct editor
};

// Throws NotFound (unknown or deleted revision), RateLimited (upstream
// 429; retriable), UpstreamTimeout, UpstreamError. Successful fetches
// are cached by revision id; cache hits make no requests.
class MediaWikiClient : public RevisionSource {
public:
    explicit MediaWikiClient(ApiClientConfig config);
    ~MediaWikiClient() override;

    FetchedRevision fetch(int64_t revision_id) override;

    uint64_t upstream_requests() const;  // lifetime count, for tests/metrics

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace kgrev
