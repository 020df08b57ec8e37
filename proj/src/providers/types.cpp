#include "scribe/providers/types.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "scribe/errors.hpp"

namespace scribe::providers {

using nlohmann::json;

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim()) {
        throw_error(Errc::dimension_mismatch,
                    "cosine over dims " + std::to_string(u.dim()) + " and " + std::to_string(v.dim()));
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        dot += u.values[i] * v.values[i];
        nu += u.values[i] * u.values[i];
        nv += v.values[i] * v.values[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw_error(Errc::zero_vector, "cosine similarity of a zero vector is undefined");
    }
    double sim = dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::clamp(sim, -1.0, 1.0);
}

std::string_view to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
        case Role::Tool: return "tool";
    }
    return "user";
}

Role role_from_string(std::string_view name) {
    if (name == "system") return Role::System;
    if (name == "user") return Role::User;
    if (name == "assistant") return Role::Assistant;
    if (name == "tool") return Role::Tool;
    throw_error(Errc::invalid_argument, "unknown chat role: " + std::string(name));
}

std::string_view to_string(SearchKind kind) {
    return kind == SearchKind::Web ? "web" : "image";
}

SearchKind search_kind_from_string(std::string_view name) {
    if (name == "web") return SearchKind::Web;
    if (name == "image") return SearchKind::Image;
    throw_error(Errc::invalid_argument, "unknown search kind: " + std::string(name));
}

void to_json(json& j, const Message& v) {
    j = json{{"role", to_string(v.role)}, {"content", v.content}};
}

void from_json(const json& j, Message& v) {
    v.role = role_from_string(j.at("role").get<std::string>());
    j.at("content").get_to(v.content);
}

void to_json(json& j, const ChatRequest& v) {
    j = json{{"messages", v.messages},
             {"temperature", v.temperature},
             {"top_p", v.top_p},
             {"model_tag", v.model_tag}};
    if (!v.attachments.empty()) j["attachments"] = v.attachments;
}

void from_json(const json& j, ChatRequest& v) {
    v = ChatRequest{};
    j.at("messages").get_to(v.messages);
    j.at("temperature").get_to(v.temperature);
    j.at("top_p").get_to(v.top_p);
    j.at("model_tag").get_to(v.model_tag);
    if (j.contains("attachments")) j.at("attachments").get_to(v.attachments);
}

void to_json(json& j, const TokenUsage& v) {
    j = json{{"prompt_tokens", v.prompt_tokens}, {"completion_tokens", v.completion_tokens}};
}

void from_json(const json& j, TokenUsage& v) {
    j.at("prompt_tokens").get_to(v.prompt_tokens);
    j.at("completion_tokens").get_to(v.completion_tokens);
}

void to_json(json& j, const ChatResponse& v) {
    j = json{{"text", v.text}, {"usage", v.usage}};
}

void from_json(const json& j, ChatResponse& v) {
    j.at("text").get_to(v.text);
    if (j.contains("usage")) j.at("usage").get_to(v.usage);
}

void to_json(json& j, const SearchRequest& v) {
    j = json{{"query", v.query}, {"k", v.k}, {"kind", to_string(v.kind)}};
}

void from_json(const json& j, SearchRequest& v) {
    j.at("query").get_to(v.query);
    j.at("k").get_to(v.k);
    v.kind = search_kind_from_string(j.at("kind").get<std::string>());
}

void to_json(json& j, const SearchHit& v) {
    j = json{{"url", v.url}, {"title", v.title}, {"snippet", v.snippet}};
    if (v.image_locator) j["image_locator"] = *v.image_locator;
}

void from_json(const json& j, SearchHit& v) {
    v = SearchHit{};
    j.at("url").get_to(v.url);
    j.at("title").get_to(v.title);
    j.at("snippet").get_to(v.snippet);
    if (j.contains("image_locator")) v.image_locator = j.at("image_locator").get<std::string>();
}

void to_json(json& j, const EmbeddingVector& v) {
    j = json{{"values", v.values}};
}

void from_json(const json& j, EmbeddingVector& v) {
    j.at("values").get_to(v.values);
}

}  // namespace scribe::providers
