#include "kgrev/api_client.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <thread>
#include <unordered_map>

namespace kgrev {

using nlohmann::json;

RateLimiter::RateLimiter(double per_second)
    : interval_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(per_second > 0.0 ? 1.0 / per_second : 0.0))),
      next_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    std::chrono::steady_clock::time_point wake;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto now = std::chrono::steady_clock::now();
        wake = std::max(next_, now);
        next_ = wake + interval_;
    }
    std::this_thread::sleep_until(wake);
}

struct MediaWikiClient::Impl {
    ApiClientConfig config;
    httplib::Client http;
    RateLimiter limiter;
    std::mutex cache_mu;
    std::unordered_map<int64_t, FetchedRevision> cache;
    std::atomic<uint64_t> requests{0};

    explicit Impl(ApiClientConfig cfg)
        : config(std::move(cfg)), http(config.base_url), limiter(config.requests_per_second) {
        http.set_connection_timeout(std::chrono::milliseconds(config.timeout_ms));
        http.set_read_timeout(std::chrono::milliseconds(config.timeout_ms));
        http.set_default_headers({{"User-Agent", config.user_agent}});
    }

    json get(const std::string& query) {
        limiter.acquire();
        requests.fetch_add(1, std::memory_order_relaxed);
        auto res = http.Get(config.api_path + "?" + query);
        if (!res) {
            auto err = res.error();
            if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
                throw UpstreamTimeout("upstream timed out: " + httplib::to_string(err));
            }
            throw UpstreamError("upstream unreachable: " + httplib::to_string(err));
        }
        if (res->status == 429) {
            std::string hint = res->get_header_value("Retry-After");
            throw RateLimited(hint.empty() ? "upstream rate limit"
                                           : "upstream rate limit, retry after " + hint + "s");
        }
        if (res->status != 200) {
            throw UpstreamError("upstream returned HTTP " + std::to_string(res->status));
        }
        json body = json::parse(res->body, nullptr, false);
        if (body.is_discarded()) throw UpstreamError("upstream returned malformed JSON");
        if (body.contains("error")) {
            throw UpstreamError("upstream API error: " +
                                body["error"].value("code", std::string("unknown")));
        }
        return body;
    }

    // First revision object under query.pages; null when the id was bad.
    // Tolerates both API format versions (pages as array or object).
    static const json* revision_of(const json& body, int64_t revision_id) {
        const auto& q = body.at("query");
        if (q.contains("badrevids")) {
            const auto& bad = q["badrevids"];
            if (bad.is_object() && bad.contains(std::to_string(revision_id))) return nullptr;
            if (bad.is_array()) {
                for (const auto& b : bad) {
                    if (b.value("revid", int64_t(-1)) == revision_id) return nullptr;
                }
            }
        }
        if (!q.contains("pages")) return nullptr;
        for (const auto& [_, page] : q["pages"].items()) {
            if (page.contains("revisions") && !page["revisions"].empty()) {
                return &page["revisions"][0];
            }
        }
        return nullptr;
    }

    static std::string content_of(const json& rev) {
        const auto& slots = rev.at("slots");
        const auto& main = slots.at("main");
        if (main.contains("content")) return main["content"].get<std::string>();
        return main.at("*").get<std::string>();
    }

    FetchedRevision fetch_uncached(int64_t revision_id) {
        json body = get("action=query&format=json&formatversion=2&prop=revisions&revids=" +
                        std::to_string(revision_id) +
                        "&rvprop=ids%7Ctimestamp%7Cuser%7Cuserid%7Ctags%7Ccontent&rvslots=main");
        const json* rev = revision_of(body, revision_id);
        if (!rev) throw NotFound("revision " + std::to_string(revision_id) + " not found");

        FetchedRevision out;
        out.meta.revision_id = (*rev).at("revid").get<int64_t>();
        out.meta.timestamp = parse_instant((*rev).at("timestamp").get<std::string>());
        for (const auto& [_, page] : body["query"]["pages"].items()) {
            if (page.contains("title")) out.meta.entity_id = page["title"].get<std::string>();
        }
        if (rev->contains("tags")) {
            for (const auto& t : (*rev)["tags"]) out.meta.tags.insert(t.get<std::string>());
        }
        out.current_json = content_of(*rev);

        bool anon = rev->value("userid", int64_t(0)) == 0;
        if (rev->contains("anon")) {
            const auto& a = (*rev)["anon"];
            anon = a.is_boolean() ? a.get<bool>() : true;  // older format: presence means anonymous
        }
        if (anon) {
            out.meta.editor = EditorInfo{};
        } else {
            out.meta.editor.is_anonymous = false;
            out.meta.editor.editor_id = (*rev).at("user").get<std::string>();
            if (config.fetch_editor_details) fill_editor_details(out.meta.editor);
        }

        int64_t parent_id = rev->value("parentid", int64_t(0));
        if (parent_id > 0) {
            out.meta.parent_revision_id = parent_id;
            json parent = get("action=query&format=json&formatversion=2&prop=revisions&revids=" +
                              std::to_string(parent_id) + "&rvprop=ids%7Ccontent&rvslots=main");
            const json* prev = revision_of(parent, parent_id);
            if (!prev) {
                throw UpstreamError("parent revision " + std::to_string(parent_id) +
                                    " of " + std::to_string(revision_id) + " not available");
            }
            out.parent_json = content_of(*prev);
        }
        return out;
    }

    void fill_editor_details(EditorInfo& editor) {
        json body = get("action=query&format=json&formatversion=2&list=users&usprop=registration"
                        "%7Ceditcount%7Cgroups&ususers=" +
                        httplib::detail::encode_url(*editor.editor_id));
        const auto& users = body.at("query").at("users");
        if (users.empty()) return;
        const auto& u = users[0];
        if (u.contains("registration") && u["registration"].is_string()) {
            editor.registration_time = parse_instant(u["registration"].get<std::string>());
        }
        editor.prior_edit_count = u.value("editcount", int64_t(0));
        if (u.contains("groups")) {
            for (const auto& g : u["groups"]) editor.groups.insert(g.get<std::string>());
        }
    }
};

MediaWikiClient::MediaWikiClient(ApiClientConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

MediaWikiClient::~MediaWikiClient() = default;

FetchedRevision MediaWikiClient::fetch(int64_t revision_id) {
    {
        std::lock_guard<std::mutex> lock(impl_->cache_mu);
        auto it = impl_->cache.find(revision_id);
        if (it != impl_->cache.end()) return it->second;
    }
    FetchedRevision fetched = impl_->fetch_uncached(revision_id);
    std::lock_guard<std::mutex> lock(impl_->cache_mu);
    return impl_->cache.emplace(revision_id, std::move(fetched)).first->second;
}

uint64_t MediaWikiClient::upstream_requests() const {
    return impl_->requests.load(std::memory_order_relaxed);
}

}  // namespace kgrev
