#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scribe/providers/request_log.hpp"
#include "scribe/providers/transport.hpp"
#include "scribe/providers/types.hpp"

namespace scribe::providers {

// How one provider slot talks to the world: live against an endpoint, or
// replaying recorded fixtures. Non-strict recorded mode may fall through to
// the live endpoint and record what it sees; strict mode never goes live.
struct ProviderMode {
    enum class Kind { Live, Recorded };

    Kind kind = Kind::Recorded;
    LiveEndpoint live;          // used when live, or as non-strict fallback
    std::string fixture_dir;
    bool strict = true;

    static ProviderMode recorded(std::string fixture_dir, bool strict = true);
    static ProviderMode live_endpoint(LiveEndpoint endpoint);
};

struct SlotConfig {
    ProviderMode mode;
    std::string model_tag;          // chat slots
    std::size_t embedding_dim = 64; // embedding slot
};

class ChatClient {
public:
    ChatClient(std::string slot, std::shared_ptr<Transport> transport,
               std::shared_ptr<RequestLog> log, std::string default_model_tag);

    // In recorded mode the response is the fixture keyed by the request
    // digest; identical requests yield identical responses.
    ChatResponse chat(ChatRequest request);

    const std::string& slot() const { return slot_; }
    const std::string& model_tag() const { return default_model_tag_; }

private:
    std::string slot_;
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<RequestLog> log_;
    std::string default_model_tag_;
};

class SearchClient {
public:
    SearchClient(std::string slot, SearchKind kind, std::shared_ptr<Transport> transport,
                 std::shared_ptr<RequestLog> log);

    // At most k hits, provider order preserved, duplicate urls removed.
    // Image searches additionally drop hits without an image locator.
    std::vector<SearchHit> search(const SearchRequest& request);

    SearchKind kind() const { return kind_; }

private:
    std::string slot_;
    SearchKind kind_;
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<RequestLog> log_;
};

class EmbeddingClient {
public:
    EmbeddingClient(std::string slot, std::shared_ptr<Transport> transport,
                    std::shared_ptr<RequestLog> log, std::size_t dim, std::string model_tag);

    EmbeddingVector embed_text(const std::string& text);
    EmbeddingVector embed_image(const core::ImageRef& image);

    std::size_t dim() const { return dim_; }

private:
    EmbeddingVector finish(const std::string& kind, const nlohmann::json& request);

    std::string slot_;
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<RequestLog> log_;
    std::size_t dim_;
    std::string model_tag_;
};

// Plain page fetch for reference-page image extraction. GET, 10s timeout,
// no script execution; recorded mode replays the body like any other call.
class PageFetcher {
public:
    PageFetcher(std::string slot, std::shared_ptr<Transport> transport,
                std::shared_ptr<RequestLog> log);

    std::string fetch(const std::string& url);

private:
    std::string slot_;
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<RequestLog> log_;
};

// The provider surface the pipeline sees: three chat slots (a small default
// model, a multimodal model, and a reasoning model for reflection), two
// search slots, embeddings, and the reference-page fetcher.
struct ProviderHub {
    std::shared_ptr<ChatClient> default_model;
    std::shared_ptr<ChatClient> multimodal_model;
    std::shared_ptr<ChatClient> reflection_model;
    std::shared_ptr<SearchClient> web_search;
    std::shared_ptr<SearchClient> image_search;
    std::shared_ptr<EmbeddingClient> embedding;
    std::shared_ptr<PageFetcher> page_fetcher;
    std::shared_ptr<Clock> clock;
    std::shared_ptr<RequestLog> log;

    // Build a transport for one slot per its mode. `scripted` (when given)
    // becomes the live side, which is how tests and the fixture generator
    // plug in deterministic backends.
    static std::shared_ptr<Transport> make_transport(const ProviderMode& mode,
                                                     std::shared_ptr<Clock> clock,
                                                     std::shared_ptr<Transport> scripted = nullptr);

    static ProviderHub make(const std::map<std::string, SlotConfig>& slots,
                            std::shared_ptr<Clock> clock, std::shared_ptr<RequestLog> log,
                            std::shared_ptr<Transport> scripted = nullptr);
};

// Slot names, fixed across config files and manifests.
inline constexpr const char* kSlotNames[] = {
    "default_model", "multimodal_model", "reflection_model",
    "web_search",    "image_search",     "embedding",
    "page_fetch",
};

}  // namespace scribe::providers
