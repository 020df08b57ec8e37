#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "scribe/providers/transport.hpp"

#include <cstdlib>
#include <fstream>
#include <mutex>

#include "scribe/errors.hpp"
#include "scribe/providers/digest.hpp"

namespace scribe::providers {

namespace fixture_store {

namespace {
// Writers across slots and threads share one lock; writes are rare.
std::mutex g_write_mutex;
}

std::filesystem::path path_for(const std::filesystem::path& dir, const std::string& digest) {
    return dir / (digest + ".json");
}

std::optional<nlohmann::json> load_response(const std::filesystem::path& dir, const std::string& digest) {
    auto path = path_for(dir, digest);
    std::ifstream in(path);
    if (!in) return std::nullopt;
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw_error(Errc::io_error, "unreadable fixture " + path.string() + ": " + e.what());
    }
    if (!doc.contains("response")) {
        throw_error(Errc::io_error, "fixture " + path.string() + " has no response field");
    }
    return doc.at("response");
}

void save(const std::filesystem::path& dir, const std::string& digest, const std::string& kind,
          const nlohmann::json& request, const nlohmann::json& response) {
    std::lock_guard lock(g_write_mutex);
    std::filesystem::create_directories(dir);
    nlohmann::json doc{{"kind", kind}, {"request", request}, {"response", response}};
    auto final_path = path_for(dir, digest);
    auto tmp_path = final_path;
    tmp_path += ".tmp";
    {
        std::ofstream out(tmp_path);
        if (!out) throw_error(Errc::io_error, "cannot write " + tmp_path.string());
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp_path, final_path);
}

}  // namespace fixture_store

ReplayTransport::ReplayTransport(std::filesystem::path fixture_dir, bool strict,
                                 std::shared_ptr<Transport> fallback)
    : fixture_dir_(std::move(fixture_dir)), strict_(strict), fallback_(std::move(fallback)) {}

nlohmann::json ReplayTransport::roundtrip(const std::string& kind, const nlohmann::json& request) {
    auto digest = request_digest(kind, request);
    if (auto response = fixture_store::load_response(fixture_dir_, digest)) {
        return *response;
    }
    if (strict_ || !fallback_) {
        throw_error(Errc::fixture_miss,
                    "no fixture " + digest + " for " + kind + " under " + fixture_dir_.string());
    }
    auto response = fallback_->roundtrip(kind, request);
    fixture_store::save(fixture_dir_, digest, kind, request, response);
    return response;
}

HttpTransport::HttpTransport(LiveEndpoint endpoint, std::shared_ptr<Clock> clock)
    : endpoint_(std::move(endpoint)),
      clock_(clock),
      limiter_(endpoint_.rate_limit_per_minute, std::move(clock)) {
    if (!endpoint_.api_key_env.empty()) {
        if (const char* key = std::getenv(endpoint_.api_key_env.c_str())) {
            api_key_ = key;
        }
    }
}

namespace {

struct SplitUrl {
    std::string scheme_host;  // e.g. https://example.org:8080
    std::string path_query;   // e.g. /v1/chat?x=y
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw_error(Errc::invalid_argument, "endpoint URL must be absolute: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpTransport::Outcome HttpTransport::attempt(const std::string& kind, const nlohmann::json& request) {
    Outcome out;
    if (kind == "fetch_page") {
        auto url = request.at("url").get<std::string>();
        auto split = split_url(url);
        httplib::Client client(split.scheme_host);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(10, 0);
        client.set_follow_location(true);
        auto res = client.Get(split.path_query);
        if (!res) {
            out.error = "GET " + url + " failed: " + httplib::to_string(res.error());
            return out;
        }
        out.status = res->status;
        out.body = res->body;
        return out;
    }
    auto split = split_url(endpoint_.url);
    httplib::Client client(split.scheme_host);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(60, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
    }
    nlohmann::json body{{"kind", kind}, {"request", request}};
    auto res = client.Post(split.path_query, headers, body.dump(), "application/json");
    if (!res) {
        out.error = "POST " + endpoint_.url + " failed: " + httplib::to_string(res.error());
        return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
}

nlohmann::json HttpTransport::roundtrip(const std::string& kind, const nlohmann::json& request) {
    const bool cacheable = !endpoint_.cache_dir.empty();
    std::string digest;
    if (cacheable) {
        digest = request_digest(kind, request);
        if (auto cached = fixture_store::load_response(endpoint_.cache_dir, digest)) {
            return *cached;
        }
    }

    std::string last_failure;
    for (int attempt_no = 1; attempt_no <= endpoint_.max_retries; ++attempt_no) {
        limiter_.acquire();
        Outcome outcome = attempt(kind, request);

        if (outcome.error.empty() && outcome.status == 402) {
            throw_error(Errc::quota_exceeded, "endpoint reported exhausted quota (402)");
        }
        if (outcome.error.empty() && outcome.status >= 200 && outcome.status < 300) {
            nlohmann::json response;
            if (kind == "fetch_page") {
                response = nlohmann::json{{"status", outcome.status}, {"body", outcome.body}};
            } else {
                try {
                    response = nlohmann::json::parse(outcome.body);
                } catch (const nlohmann::json::exception& e) {
                    throw_error(Errc::transport_error,
                                std::string("endpoint returned unparsable JSON: ") + e.what());
                }
            }
            if (cacheable) {
                fixture_store::save(endpoint_.cache_dir, digest, kind, request, response);
            }
            return response;
        }

        last_failure = !outcome.error.empty()
                           ? outcome.error
                           : "HTTP " + std::to_string(outcome.status) + " from " + endpoint_.url;
        if (attempt_no < endpoint_.max_retries) {
            auto backoff = std::chrono::milliseconds(endpoint_.initial_backoff_ms << (attempt_no - 1));
            clock_->sleep_for(backoff);
        } else if (outcome.error.empty() && outcome.status == 429) {
            throw_error(Errc::rate_limited, "still rate limited after " +
                                                std::to_string(endpoint_.max_retries) + " attempts");
        }
    }
    throw_error(Errc::transport_error, last_failure + " (after " +
                                           std::to_string(endpoint_.max_retries) + " attempts)");
}

}  // namespace scribe::providers
