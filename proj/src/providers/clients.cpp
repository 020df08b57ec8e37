#include "scribe/providers/clients.hpp"

#include <algorithm>
#include <unordered_set>

#include "scribe/errors.hpp"
#include "scribe/providers/digest.hpp"

namespace scribe::providers {

ProviderMode ProviderMode::recorded(std::string fixture_dir, bool strict) {
    ProviderMode mode;
    mode.kind = Kind::Recorded;
    mode.fixture_dir = std::move(fixture_dir);
    mode.strict = strict;
    return mode;
}

ProviderMode ProviderMode::live_endpoint(LiveEndpoint endpoint) {
    ProviderMode mode;
    mode.kind = Kind::Live;
    mode.live = std::move(endpoint);
    return mode;
}

ChatClient::ChatClient(std::string slot, std::shared_ptr<Transport> transport,
                       std::shared_ptr<RequestLog> log, std::string default_model_tag)
    : slot_(std::move(slot)),
      transport_(std::move(transport)),
      log_(std::move(log)),
      default_model_tag_(std::move(default_model_tag)) {}

ChatResponse ChatClient::chat(ChatRequest request) {
    if (request.messages.empty()) {
        throw_error(Errc::invalid_argument, "chat request has no messages");
    }
    if (request.temperature < 0.0 || request.temperature > 2.0) {
        throw_error(Errc::invalid_argument, "temperature outside [0,2]");
    }
    if (request.top_p <= 0.0 || request.top_p > 1.0) {
        throw_error(Errc::invalid_argument, "top_p outside (0,1]");
    }
    if (request.model_tag.empty()) {
        request.model_tag = default_model_tag_;
    }
    nlohmann::json body = request;
    auto digest = request_digest("chat", body);
    if (log_) log_->record(slot_, "chat", digest, body);
    auto response = transport_->roundtrip("chat", body);
    return response.get<ChatResponse>();
}

SearchClient::SearchClient(std::string slot, SearchKind kind, std::shared_ptr<Transport> transport,
                           std::shared_ptr<RequestLog> log)
    : slot_(std::move(slot)), kind_(kind), transport_(std::move(transport)), log_(std::move(log)) {}

std::vector<SearchHit> SearchClient::search(const SearchRequest& request) {
    if (request.query.empty()) {
        throw_error(Errc::invalid_argument, "search query is empty");
    }
    if (request.k < 1) {
        throw_error(Errc::invalid_argument, "search k must be >= 1");
    }
    if (request.kind != kind_) {
        throw_error(Errc::invalid_argument, "search kind does not match this client");
    }
    const std::string kind_name = kind_ == SearchKind::Web ? "web_search" : "image_search";
    nlohmann::json body = request;
    auto digest = request_digest(kind_name, body);
    if (log_) log_->record(slot_, kind_name, digest, body);
    auto response = transport_->roundtrip(kind_name, body);

    std::vector<SearchHit> hits;
    std::unordered_set<std::string> seen;
    for (const auto& item : response.at("hits")) {
        auto hit = item.get<SearchHit>();
        if (hit.url.empty()) continue;
        if (kind_ == SearchKind::Image && (!hit.image_locator || hit.image_locator->empty())) {
            continue;  // image hits must carry a locator
        }
        if (!seen.insert(hit.url).second) continue;
        hits.push_back(std::move(hit));
        if (static_cast<int>(hits.size()) == request.k) break;
    }
    return hits;
}

EmbeddingClient::EmbeddingClient(std::string slot, std::shared_ptr<Transport> transport,
                                 std::shared_ptr<RequestLog> log, std::size_t dim,
                                 std::string model_tag)
    : slot_(std::move(slot)),
      transport_(std::move(transport)),
      log_(std::move(log)),
      dim_(dim),
      model_tag_(std::move(model_tag)) {}

EmbeddingVector EmbeddingClient::finish(const std::string& kind, const nlohmann::json& request) {
    auto digest = request_digest(kind, request);
    if (log_) log_->record(slot_, kind, digest, request);
    auto response = transport_->roundtrip(kind, request);
    EmbeddingVector vec = response.get<EmbeddingVector>();
    if (vec.dim() != dim_) {
        throw_error(Errc::dimension_mismatch, "provider returned dim " + std::to_string(vec.dim()) +
                                                  ", expected " + std::to_string(dim_));
    }
    if (std::all_of(vec.values.begin(), vec.values.end(), [](double x) { return x == 0.0; })) {
        throw_error(Errc::zero_vector, "provider returned an all-zero embedding");
    }
    return vec;
}

EmbeddingVector EmbeddingClient::embed_text(const std::string& text) {
    if (text.empty()) throw_error(Errc::invalid_argument, "cannot embed empty text");
    nlohmann::json request{{"text", text}, {"dim", dim_}, {"model_tag", model_tag_}};
    return finish("embed_text", request);
}

EmbeddingVector EmbeddingClient::embed_image(const core::ImageRef& image) {
    if (image.locator.empty()) throw_error(Errc::invalid_argument, "cannot embed an empty locator");
    nlohmann::json request{{"locator", image.locator}, {"dim", dim_}, {"model_tag", model_tag_}};
    return finish("embed_image", request);
}

PageFetcher::PageFetcher(std::string slot, std::shared_ptr<Transport> transport,
                         std::shared_ptr<RequestLog> log)
    : slot_(std::move(slot)), transport_(std::move(transport)), log_(std::move(log)) {}

std::string PageFetcher::fetch(const std::string& url) {
    if (url.empty()) throw_error(Errc::invalid_argument, "cannot fetch an empty url");
    nlohmann::json request{{"url", url}};
    auto digest = request_digest("fetch_page", request);
    if (log_) log_->record(slot_, "fetch_page", digest, request);
    auto response = transport_->roundtrip("fetch_page", request);
    int status = response.value("status", 0);
    if (status < 200 || status >= 300) {
        throw_error(Errc::transport_error, "fetch of " + url + " returned status " + std::to_string(status));
    }
    return response.at("body").get<std::string>();
}

std::shared_ptr<Transport> ProviderHub::make_transport(const ProviderMode& mode,
                                                       std::shared_ptr<Clock> clock,
                                                       std::shared_ptr<Transport> scripted) {
    std::shared_ptr<Transport> live = scripted;
    if (!live && !mode.live.url.empty()) {
        live = std::make_shared<HttpTransport>(mode.live, clock);
    }
    if (mode.kind == ProviderMode::Kind::Live) {
        if (!live) throw_error(Errc::config_error, "live mode requires an endpoint URL");
        return live;
    }
    if (mode.fixture_dir.empty()) {
        throw_error(Errc::config_error, "recorded mode requires a fixture directory");
    }
    auto fallback = mode.strict ? nullptr : live;
    return std::make_shared<ReplayTransport>(mode.fixture_dir, mode.strict, fallback);
}

ProviderHub ProviderHub::make(const std::map<std::string, SlotConfig>& slots,
                              std::shared_ptr<Clock> clock, std::shared_ptr<RequestLog> log,
                              std::shared_ptr<Transport> scripted) {
    auto slot_config = [&](const std::string& name) -> const SlotConfig& {
        auto it = slots.find(name);
        if (it == slots.end()) {
            throw_error(Errc::config_error, "missing provider slot: " + name);
        }
        return it->second;
    };
    auto transport_for = [&](const std::string& name) {
        return make_transport(slot_config(name).mode, clock, scripted);
    };

    ProviderHub hub;
    hub.clock = clock;
    hub.log = log;
    hub.default_model = std::make_shared<ChatClient>("default_model", transport_for("default_model"),
                                                     log, slot_config("default_model").model_tag);
    hub.multimodal_model =
        std::make_shared<ChatClient>("multimodal_model", transport_for("multimodal_model"), log,
                                     slot_config("multimodal_model").model_tag);
    hub.reflection_model =
        std::make_shared<ChatClient>("reflection_model", transport_for("reflection_model"), log,
                                     slot_config("reflection_model").model_tag);
    hub.web_search = std::make_shared<SearchClient>("web_search", SearchKind::Web,
                                                    transport_for("web_search"), log);
    hub.image_search = std::make_shared<SearchClient>("image_search", SearchKind::Image,
                                                      transport_for("image_search"), log);
    const auto& embed_cfg = slot_config("embedding");
    hub.embedding = std::make_shared<EmbeddingClient>("embedding", transport_for("embedding"), log,
                                                      embed_cfg.embedding_dim, embed_cfg.model_tag);
    // page_fetch falls back to the embedding slot's mode when not configured
    // separately; it shares the fixture keyspace either way.
    auto page_cfg = slots.count("page_fetch") ? slot_config("page_fetch") : embed_cfg;
    hub.page_fetcher = std::make_shared<PageFetcher>(
        "page_fetch", make_transport(page_cfg.mode, clock, scripted), log);
    return hub;
}

}  // namespace scribe::providers
