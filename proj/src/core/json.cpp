#include <nlohmann/json.hpp>

#include "scribe/core/types.hpp"

namespace scribe::core {

using nlohmann::json;

void to_json(json& j, const ImageRef& v) {
    j = json{{"locator", v.locator}};
    if (v.alt_text) j["alt_text"] = *v.alt_text;
}

void from_json(const json& j, ImageRef& v) {
    j.at("locator").get_to(v.locator);
    if (j.contains("alt_text")) v.alt_text = j.at("alt_text").get<std::string>();
}

void to_json(json& j, const Topic& v) {
    j = json{{"id", v.id}};
    if (v.text) j["text"] = *v.text;
    if (v.image) j["image"] = *v.image;
    if (v.source_char_count) j["source_char_count"] = *v.source_char_count;
}

void from_json(const json& j, Topic& v) {
    v = Topic{};
    if (j.contains("id")) j.at("id").get_to(v.id);
    if (j.contains("text")) v.text = j.at("text").get<std::string>();
    if (j.contains("image")) v.image = j.at("image").get<ImageRef>();
    if (j.contains("source_char_count")) v.source_char_count = j.at("source_char_count").get<std::uint64_t>();
}

void to_json(json& j, const Citation& v) {
    j = json{{"url", v.url}, {"title", v.title}, {"snippet", v.snippet}, {"retrieved_at", v.retrieved_at}};
}

void from_json(const json& j, Citation& v) {
    j.at("url").get_to(v.url);
    j.at("title").get_to(v.title);
    j.at("snippet").get_to(v.snippet);
    j.at("retrieved_at").get_to(v.retrieved_at);
}

void to_json(json& j, const Paragraph& v) {
    j = json{{"text", v.text}, {"citation_indices", v.citation_indices}};
}

void from_json(const json& j, Paragraph& v) {
    j.at("text").get_to(v.text);
    j.at("citation_indices").get_to(v.citation_indices);
}

void to_json(json& j, const Section& v) {
    j = json{{"heading", v.heading}, {"paragraphs", v.paragraphs}};
}

void from_json(const json& j, Section& v) {
    j.at("heading").get_to(v.heading);
    j.at("paragraphs").get_to(v.paragraphs);
}

void to_json(json& j, const ImagePlacement& v) {
    j = json{{"section_index", v.section_index},
             {"paragraph_index", v.paragraph_index},
             {"desired_caption", v.desired_caption},
             {"rationale", v.rationale}};
}

void from_json(const json& j, ImagePlacement& v) {
    j.at("section_index").get_to(v.section_index);
    j.at("paragraph_index").get_to(v.paragraph_index);
    j.at("desired_caption").get_to(v.desired_caption);
    j.at("rationale").get_to(v.rationale);
}

void to_json(json& j, const ArticleDraft& v) {
    j = json{{"topic_id", v.topic_id},
             {"sections", v.sections},
             {"references", v.references},
             {"placements", v.placements}};
}

void from_json(const json& j, ArticleDraft& v) {
    j.at("topic_id").get_to(v.topic_id);
    j.at("sections").get_to(v.sections);
    j.at("references").get_to(v.references);
    v.placements.clear();
    if (j.contains("placements")) j.at("placements").get_to(v.placements);
}

}  // namespace scribe::core
