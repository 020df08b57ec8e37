#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "scribe/providers/clock.hpp"
#include "scribe/providers/rate_limiter.hpp"

namespace scribe::providers {

// Resolves one provider request (kind + canonical JSON) to a response JSON.
// Implementations: live HTTP, recorded fixtures, and test scripts.
class Transport {
public:
    virtual ~Transport() = default;
    virtual nlohmann::json roundtrip(const std::string& kind, const nlohmann::json& request) = 0;
};

// Content-addressed request/response files: <dir>/<digest>.json holding
// {"kind", "request", "response"}. Fixtures and the live cache share this
// layout, so a live run can be frozen into a fixture set as-is.
namespace fixture_store {

std::filesystem::path path_for(const std::filesystem::path& dir, const std::string& digest);
std::optional<nlohmann::json> load_response(const std::filesystem::path& dir, const std::string& digest);
void save(const std::filesystem::path& dir, const std::string& digest, const std::string& kind,
          const nlohmann::json& request, const nlohmann::json& response);

}  // namespace fixture_store

// Replays fixtures keyed by request digest. Strict mode forbids any live
// call: a missing digest is a FixtureMiss. Non-strict mode forwards misses to
// the fallback transport (when configured) and records the response, which is
// how fixture sets get captured in the first place.
class ReplayTransport final : public Transport {
public:
    ReplayTransport(std::filesystem::path fixture_dir, bool strict,
                    std::shared_ptr<Transport> fallback = nullptr);

    nlohmann::json roundtrip(const std::string& kind, const nlohmann::json& request) override;

private:
    std::filesystem::path fixture_dir_;
    bool strict_;
    std::shared_ptr<Transport> fallback_;
};

struct LiveEndpoint {
    std::string url;              // full endpoint URL for this slot
    std::string api_key_env;      // env var holding the bearer token, may be empty
    int rate_limit_per_minute = 60;
    int max_retries = 3;          // attempts, not additional retries
    int initial_backoff_ms = 1000;
    std::string cache_dir;        // optional on-disk response cache
};

// Live HTTP JSON transport with rate limiting, bounded retries with
// exponential backoff, and optional digest-keyed response caching.
//
// Wire protocol (the normalized provider schema; vendor adapters live behind
// it as configuration):
//   fetch_page  -> GET <request.url>, response {"status", "body"}
//   everything else -> POST endpoint.url with the canonical request JSON,
//   response is the normalized response JSON for that kind.
class HttpTransport final : public Transport {
public:
    HttpTransport(LiveEndpoint endpoint, std::shared_ptr<Clock> clock);

    nlohmann::json roundtrip(const std::string& kind, const nlohmann::json& request) override;

private:
    struct Outcome {
        int status = 0;
        std::string body;
        std::string error;  // non-empty on connection-level failure
    };

    Outcome attempt(const std::string& kind, const nlohmann::json& request);

    LiveEndpoint endpoint_;
    std::string api_key_;
    std::shared_ptr<Clock> clock_;
    RateLimiter limiter_;
};

// Answers requests via a plain function; unit tests and the bundled fixture
// generator script providers with it.
class FunctionTransport final : public Transport {
public:
    using Handler = std::function<nlohmann::json(const std::string&, const nlohmann::json&)>;

    explicit FunctionTransport(Handler handler) : handler_(std::move(handler)) {}

    nlohmann::json roundtrip(const std::string& kind, const nlohmann::json& request) override {
        return handler_(kind, request);
    }

private:
    Handler handler_;
};

}  // namespace scribe::providers
