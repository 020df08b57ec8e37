#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scribe/core/types.hpp"

namespace scribe::providers {

enum class Role { System, User, Assistant, Tool };

struct Message {
    Role role = Role::User;
    std::string content;

    bool operator==(const Message&) const = default;
};

// Request to a chat model slot. Decoding defaults are temperature 1.0 and
// top_p 0.9; attachments are only meaningful on multimodal slots.
struct ChatRequest {
    std::vector<Message> messages;
    double temperature = 1.0;
    double top_p = 0.9;
    std::string model_tag;
    std::vector<core::ImageRef> attachments;
};

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;

    bool operator==(const TokenUsage&) const = default;
};

struct ChatResponse {
    std::string text;
    TokenUsage usage;

    bool operator==(const ChatResponse&) const = default;
};

enum class SearchKind { Web, Image };

struct SearchRequest {
    std::string query;
    int k = 5;  // up to 5 hits per query unless the caller asks otherwise
    SearchKind kind = SearchKind::Web;
};

struct SearchHit {
    std::string url;
    std::string title;
    std::string snippet;
    std::optional<std::string> image_locator;  // image searches only

    bool operator==(const SearchHit&) const = default;
};

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }

    bool operator==(const EmbeddingVector&) const = default;
};

// dot(u,v) / (|u||v|), in [-1,1]. Throws DimensionMismatch on unequal dims
// and ZeroVector when either input has zero norm.
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

std::string_view to_string(Role role);
Role role_from_string(std::string_view name);
std::string_view to_string(SearchKind kind);
SearchKind search_kind_from_string(std::string_view name);

// Canonical JSON forms. Request canonicalization matters: the digest of the
// serialized request keys both fixtures and the live cache.
void to_json(nlohmann::json& j, const Message& v);
void from_json(const nlohmann::json& j, Message& v);
void to_json(nlohmann::json& j, const ChatRequest& v);
void from_json(const nlohmann::json& j, ChatRequest& v);
void to_json(nlohmann::json& j, const TokenUsage& v);
void from_json(const nlohmann::json& j, TokenUsage& v);
void to_json(nlohmann::json& j, const ChatResponse& v);
void from_json(const nlohmann::json& j, ChatResponse& v);
void to_json(nlohmann::json& j, const SearchRequest& v);
void from_json(const nlohmann::json& j, SearchRequest& v);
void to_json(nlohmann::json& j, const SearchHit& v);
void from_json(const nlohmann::json& j, SearchHit& v);
void to_json(nlohmann::json& j, const EmbeddingVector& v);
void from_json(const nlohmann::json& j, EmbeddingVector& v);

}  // namespace scribe::providers
