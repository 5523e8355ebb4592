#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <functional>
#include <thread>

#include "kgrev/api_client.hpp"

using namespace kgrev;
using nlohmann::json;

namespace {

// In-process stand-in for the MediaWiki action API.
class MockApi {
  public:
    MockApi() {
        server_.Get("/w/api.php", [this](const httplib::Request& req, httplib::Response& res) {
            hits_.fetch_add(1);
            handler(req, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockApi() {
        server_.stop();
        thread_.join();
    }

    ApiClientConfig config() const {
        ApiClientConfig c;
        c.base_url = "http://127.0.0.1:" + std::to_string(port_);
        c.requests_per_second = 10000.0;
        c.timeout_ms = 2000;
        return c;
    }

    int hits() const { return hits_.load(); }

    std::function<void(const httplib::Request&, httplib::Response&)> handler;

  private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<int> hits_{0};
};

std::string entity_json(const std::string& id, const std::string& label) {
    json doc;
    doc["id"] = id;
    doc["labels"]["en"] = {{"language", "en"}, {"value", label}};
    return doc.dump();
}

json revision_response(int64_t revid, int64_t parentid, const std::string& title,
                       const std::string& user, int64_t userid, const std::string& content) {
    json rev;
    rev["revid"] = revid;
    rev["parentid"] = parentid;
    rev["timestamp"] = "2021-06-01T12:00:00Z";
    rev["user"] = user;
    rev["userid"] = userid;
    rev["tags"] = json::array({"wikidata-ui"});
    rev["slots"]["main"]["content"] = content;
    json body;
    body["query"]["pages"] = json::array(
        {json{{"pageid", 1}, {"title", title}, {"revisions", json::array({rev})}}});
    return body;
}

// Routes by query shape: revision queries by revids, user queries by list.
void standard_routes(const httplib::Request& req, httplib::Response& res) {
    if (req.get_param_value("list") == "users") {
        json body;
        body["query"]["users"] = json::array({json{{"name", req.get_param_value("ususers")},
                                                   {"userid", 7},
                                                   {"registration", "2015-01-01T00:00:00Z"},
                                                   {"editcount", 123},
                                                   {"groups", json::array({"user", "autoconfirmed"})}}});
        res.set_content(body.dump(), "application/json");
        return;
    }
    auto revids = req.get_param_value("revids");
    if (revids == "100") {
        res.set_content(revision_response(100, 99, "Q219", "UserA", 7,
                                          entity_json("Q219", "Bulgaria"))
                            .dump(),
                        "application/json");
    } else if (revids == "99") {
        res.set_content(revision_response(99, 0, "Q219", "UserB", 9,
                                          entity_json("Q219", "Balgariya"))
                            .dump(),
                        "application/json");
    } else if (revids == "200") {
        res.set_content(revision_response(200, 0, "Q42", "203.0.113.5", 0,
                                          entity_json("Q42", "Douglas Adams"))
                            .dump(),
                        "application/json");
    } else {
        json body;
        body["query"]["badrevids"][revids] = {{"revid", std::stoll(revids)}};
        res.set_content(body.dump(), "application/json");
    }
}

}  // namespace

TEST_CASE("rate limiter spaces acquisitions to the configured rate") {
    RateLimiter limiter(50.0);  // 20ms apart
    auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 10; ++i) limiter.acquire();
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    CHECK(elapsed.count() >= 0.15);  // at least 9 intervals, scheduling slack allowed
}

TEST_CASE("rate limiter is safe under contention") {
    RateLimiter limiter(200.0);
    auto start = std::chrono::steady_clock::now();
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&] {
            for (int i = 0; i < 5; ++i) limiter.acquire();
        });
    }
    for (auto& t : threads) t.join();
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    CHECK(elapsed.count() >= 0.09);  // 20 calls at 5ms spacing, minus the free first
}

TEST_CASE("fetch assembles revision, parent, and editor details") {
    MockApi api;
    api.handler = standard_routes;
    MediaWikiClient client(api.config());

    auto fetched = client.fetch(100);
    CHECK(fetched.meta.revision_id == 100);
    CHECK(fetched.meta.entity_id == "Q219");
    CHECK(fetched.meta.parent_revision_id == std::optional<int64_t>(99));
    CHECK(fetched.meta.timestamp == parse_instant("2021-06-01T12:00:00Z"));
    CHECK(fetched.meta.tags.count("wikidata-ui") == 1);

    CHECK_FALSE(fetched.meta.editor.is_anonymous);
    CHECK(fetched.meta.editor.editor_id == std::optional<std::string>("UserA"));
    CHECK(fetched.meta.editor.registration_time ==
          std::optional<Instant>(parse_instant("2015-01-01T00:00:00Z")));
    CHECK(fetched.meta.editor.prior_edit_count == 123);
    CHECK(fetched.meta.editor.groups == std::set<std::string>{"user", "autoconfirmed"});

    CHECK(fetched.current_json.find("Bulgaria") != std::string::npos);
    REQUIRE(fetched.parent_json.has_value());
    CHECK(fetched.parent_json->find("Balgariya") != std::string::npos);

    // revision + parent + user details
    CHECK(client.upstream_requests() == 3);
}

TEST_CASE("cache hits make no upstream requests") {
    MockApi api;
    api.handler = standard_routes;
    MediaWikiClient client(api.config());

    auto first = client.fetch(100);
    auto requests = client.upstream_requests();
    auto second = client.fetch(100);
    CHECK(client.upstream_requests() == requests);
    CHECK(second.current_json == first.current_json);
    CHECK(second.meta == first.meta);
}

TEST_CASE("page creations by anonymous editors need one request") {
    MockApi api;
    api.handler = standard_routes;
    MediaWikiClient client(api.config());

    auto fetched = client.fetch(200);
    CHECK(fetched.meta.editor.is_anonymous);
    CHECK_FALSE(fetched.meta.editor.editor_id.has_value());
    CHECK_FALSE(fetched.meta.parent_revision_id.has_value());
    CHECK_FALSE(fetched.parent_json.has_value());
    CHECK(client.upstream_requests() == 1);  // no parent, no user lookup
}

TEST_CASE("the older response format still parses") {
    MockApi api;
    api.handler = [](const httplib::Request& req, httplib::Response& res) {
        // pages keyed by pageid, anonymity flagged by bare "anon", content
        // under "*": the pre-formatversion=2 shape.
        json rev;
        rev["revid"] = 300;
        rev["parentid"] = 0;
        rev["timestamp"] = "2021-06-01T12:00:00Z";
        rev["user"] = "198.51.100.17";
        rev["anon"] = "";
        rev["slots"]["main"]["*"] = entity_json("Q7", "seven");
        json body;
        body["query"]["pages"]["123"] = {{"pageid", 123},
                                         {"title", "Q7"},
                                         {"revisions", json::array({rev})}};
        res.set_content(body.dump(), "application/json");
        (void)req;
    };
    MediaWikiClient client(api.config());
    auto fetched = client.fetch(300);
    CHECK(fetched.meta.entity_id == "Q7");
    CHECK(fetched.meta.editor.is_anonymous);
    CHECK(fetched.current_json.find("seven") != std::string::npos);
}

TEST_CASE("unknown revisions raise NotFound") {
    MockApi api;
    api.handler = standard_routes;
    MediaWikiClient client(api.config());
    CHECK_THROWS_AS(client.fetch(424242), NotFound);

    // array-shaped badrevids
    api.handler = [](const httplib::Request&, httplib::Response& res) {
        json body;
        body["query"]["badrevids"] = json::array({json{{"revid", 555}}});
        res.set_content(body.dump(), "application/json");
    };
    CHECK_THROWS_AS(client.fetch(555), NotFound);
}

TEST_CASE("upstream 429 maps to RateLimited with the retry hint") {
    MockApi api;
    api.handler = [](const httplib::Request&, httplib::Response& res) {
        res.status = 429;
        res.set_header("Retry-After", "7");
        res.set_content("slow down", "text/plain");
    };
    MediaWikiClient client(api.config());
    try {
        client.fetch(100);
        FAIL("expected RateLimited");
    } catch (const RateLimited& e) {
        CHECK(std::string(e.what()).find("7") != std::string::npos);
    }
}

TEST_CASE("upstream failures map to UpstreamError") {
    MockApi api;
    MediaWikiClient client(api.config());

    api.handler = [](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("boom", "text/plain");
    };
    CHECK_THROWS_AS(client.fetch(1), UpstreamError);

    api.handler = [](const httplib::Request&, httplib::Response& res) {
        res.set_content("<html>this is not json</html>", "text/html");
    };
    CHECK_THROWS_AS(client.fetch(2), UpstreamError);

    api.handler = [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"error": {"code": "maxlag", "info": "lagged"}})",
                        "application/json");
    };
    try {
        client.fetch(3);
        FAIL("expected UpstreamError");
    } catch (const UpstreamError& e) {
        CHECK(std::string(e.what()).find("maxlag") != std::string::npos);
    }
}

TEST_CASE("a missing parent revision is an upstream error") {
    MockApi api;
    api.handler = [](const httplib::Request& req, httplib::Response& res) {
        auto revids = req.get_param_value("revids");
        if (revids == "400") {
            res.set_content(revision_response(400, 399, "Q9", "1.2.3.4", 0,
                                              entity_json("Q9", "nine"))
                                .dump(),
                            "application/json");
        } else {
            json body;
            body["query"]["badrevids"][revids] = {{"revid", std::stoll(revids)}};
            res.set_content(body.dump(), "application/json");
        }
    };
    MediaWikiClient client(api.config());
    CHECK_THROWS_AS(client.fetch(400), UpstreamError);
}

TEST_CASE("a stalled upstream maps to UpstreamTimeout") {
    MockApi api;
    api.handler = [](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(900));
        res.set_content("{}", "application/json");
    };
    auto config = api.config();
    config.timeout_ms = 150;
    MediaWikiClient client(config);
    CHECK_THROWS_AS(client.fetch(100), UpstreamTimeout);
}

TEST_CASE("editors without a recorded registration stay registered") {
    MockApi api;
    api.handler = [](const httplib::Request& req, httplib::Response& res) {
        if (req.get_param_value("list") == "users") {
            json body;
            body["query"]["users"] = json::array(
                {json{{"name", "OldTimer"}, {"userid", 3}, {"registration", nullptr},
                      {"editcount", 90000}}});
            res.set_content(body.dump(), "application/json");
            return;
        }
        res.set_content(revision_response(500, 0, "Q1", "OldTimer", 3,
                                          entity_json("Q1", "one"))
                            .dump(),
                        "application/json");
    };
    MediaWikiClient client(api.config());
    auto fetched = client.fetch(500);
    CHECK_FALSE(fetched.meta.editor.is_anonymous);
    CHECK_FALSE(fetched.meta.editor.registration_time.has_value());
    CHECK(fetched.meta.editor.prior_edit_count == 90000);
}
