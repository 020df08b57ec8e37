#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scribe/core/types.hpp"
#include "scribe/providers/clients.hpp"

namespace scribe::outline {

// What interpretation learned about the topic before any planning.
struct TopicBrief {
    std::string refined_title;
    core::Modality modality = core::Modality::TextOnly;
    std::string description;
    std::vector<std::string> keywords;  // unique, at most keyword_k
    std::vector<providers::SearchHit> metadata_hits;
};

struct OutlineSection {
    std::string heading;
    std::vector<std::string> guiding_questions;
    int depth = 1;  // 1 or 2; depth-2 sections follow their depth-1 parent

    bool operator==(const OutlineSection&) const = default;
};

struct OutlinePlan {
    std::string topic_id;
    std::vector<OutlineSection> sections;

    bool operator==(const OutlinePlan&) const = default;
};

// Produces entity candidates from one text, in occurrence order. The
// counting contract lives in extract_keywords; extractors only nominate.
class EntityExtractor {
public:
    virtual ~EntityExtractor() = default;
    virtual std::vector<std::string> extract(const std::string& text) = 0;
};

// Deterministic heuristic: maximal runs of capitalized tokens. No model
// involved, so tests and recorded runs do not need extra fixtures.
class CapitalizedNgramExtractor final : public EntityExtractor {
public:
    std::vector<std::string> extract(const std::string& text) override;
};

// Asks a chat slot to list entities (ENTITY: <name> lines).
class LlmEntityExtractor final : public EntityExtractor {
public:
    explicit LlmEntityExtractor(std::shared_ptr<providers::ChatClient> model)
        : model_(std::move(model)) {}

    std::vector<std::string> extract(const std::string& text) override;

private:
    std::shared_ptr<providers::ChatClient> model_;
};

// Top-k entities by frequency across all texts. Counting is case-insensitive
// on the exact surface form; ties break by first occurrence, then
// lexicographically; the returned strings are the first-seen surface forms.
std::vector<std::string> extract_keywords(const std::vector<std::string>& texts,
                                          EntityExtractor& extractor, std::size_t k = 10);

struct OutlineOptions {
    std::size_t keyword_k = 10;
    std::size_t max_sections = 12;   // outline size cap
    int metadata_search_k = 5;
};

// Builds the TopicBrief per modality: text analysis for text, an
// image-metadata lookup (ridden over the web_search slot with the locator as
// query; a vision-search adapter sits behind the endpoint in live mode) for
// images, both merged for image-text topics.
TopicBrief interpret_topic(const core::ValidatedTopic& topic, const providers::ProviderHub& hub,
                           EntityExtractor& extractor, const OutlineOptions& options = {});

// Prompts for an outline and parses the reply strictly as ATX heading
// markup. One re-prompt with a format reminder, then OutlineParseError.
OutlinePlan propose_outline(const TopicBrief& brief, const std::string& topic_id,
                            const providers::ProviderHub& hub, const OutlineOptions& options = {});

// `# Heading` / `## Subheading` lines, optional `- guiding question` bullets
// beneath a heading. Anything else is a parse error.
OutlinePlan parse_outline_markup(const std::string& text, const std::string& topic_id);
std::string outline_to_markup(const OutlinePlan& plan);

void validate_outline(const OutlinePlan& plan);

void to_json(nlohmann::json& j, const OutlineSection& v);
void from_json(const nlohmann::json& j, OutlineSection& v);
void to_json(nlohmann::json& j, const OutlinePlan& v);
void from_json(const nlohmann::json& j, OutlinePlan& v);

}  // namespace scribe::outline
