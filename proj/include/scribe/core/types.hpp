#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

// Domain types shared by every pipeline stage. All of them are immutable
// value types after construction and safe to copy between tasks.

namespace scribe::core {

enum class Modality { TextOnly, ImageOnly, ImageText };

struct ImageRef {
    std::string locator;  // URL or local path, never empty
    std::optional<std::string> alt_text;

    bool operator==(const ImageRef&) const = default;
};

// The input unit of a run: text, image, or both.
struct Topic {
    std::string id;
    std::optional<std::string> text;
    std::optional<ImageRef> image;
    // Length of the topic's source article; only used by benchmark curation.
    std::optional<std::uint64_t> source_char_count;

    bool operator==(const Topic&) const = default;
};

struct ValidatedTopic {
    Topic topic;
    Modality modality;
};

// Checks the Topic invariants and tags the modality.
// Throws EmptyTopic when both text and image are absent, EmptyText when the
// text is present but whitespace-only.
ValidatedTopic validate_topic(const Topic& topic);

// Hard < VeryHard < ExtremelyHard in difficulty; OutOfBenchmark means the
// source article is long enough that the topic is not benchmark material.
enum class DifficultyLevel { Hard, VeryHard, ExtremelyHard, OutOfBenchmark };

// [0,100) -> ExtremelyHard, [100,300) -> VeryHard, [300,500) -> Hard,
// >= 500 -> OutOfBenchmark. Total, pure, monotone.
DifficultyLevel classify_difficulty(std::uint64_t char_count) noexcept;

struct Citation {
    std::string url;
    std::string title;
    std::string snippet;
    std::string retrieved_at;  // ISO-8601 UTC, e.g. "2025-01-01T00:00:00Z"

    bool operator==(const Citation&) const = default;
};

struct Paragraph {
    std::string text;
    std::vector<std::size_t> citation_indices;  // indices into ArticleDraft::references

    bool operator==(const Paragraph&) const = default;
};

struct Section {
    std::string heading;  // never empty
    std::vector<Paragraph> paragraphs;

    bool operator==(const Section&) const = default;
};

// Where an image belongs in the article and what it should depict. Produced
// by the visual stage; empty on drafts that have not reached it.
struct ImagePlacement {
    std::size_t section_index = 0;
    std::size_t paragraph_index = 0;
    std::string desired_caption;
    std::string rationale;

    bool operator==(const ImagePlacement&) const = default;
};

struct ArticleDraft {
    std::string topic_id;
    std::vector<Section> sections;
    std::vector<Citation> references;
    std::vector<ImagePlacement> placements;

    bool operator==(const ArticleDraft&) const = default;
};

// One-pass check: every citation index valid, no duplicate reference urls.
bool article_invariants_hold(const ArticleDraft& article);

// Same check, but throws InvalidArticle with a description of the violation.
void validate_article(const ArticleDraft& article);

// Stable topic id derived from the topic content, for reproducible output
// directories when the caller does not supply one. 16 hex chars.
std::string derive_topic_id(const std::optional<std::string>& text,
                            const std::optional<ImageRef>& image);

// Number of Unicode scalar values in a UTF-8 string. Invalid bytes count as
// one scalar each so the function is total.
std::size_t utf8_codepoint_count(std::string_view text);

// True when the string looks like an absolute http(s) URL or a local path.
bool plausible_url(std::string_view url);

// Markdown rendering of the text-only article: ATX section headings,
// paragraphs with 1-based citation markers, and a numbered References list.
std::string to_markdown(const ArticleDraft& article);

std::string_view to_string(Modality modality);
std::string_view to_string(DifficultyLevel level);
Modality modality_from_string(std::string_view name);
DifficultyLevel difficulty_from_string(std::string_view name);

// Canonical JSON (snake_case field names, optionals omitted when absent).
// This serialization is the interchange format for all persisted artifacts.
void to_json(nlohmann::json& j, const ImageRef& v);
void from_json(const nlohmann::json& j, ImageRef& v);
void to_json(nlohmann::json& j, const Topic& v);
void from_json(const nlohmann::json& j, Topic& v);
void to_json(nlohmann::json& j, const Citation& v);
void from_json(const nlohmann::json& j, Citation& v);
void to_json(nlohmann::json& j, const Paragraph& v);
void from_json(const nlohmann::json& j, Paragraph& v);
void to_json(nlohmann::json& j, const Section& v);
void from_json(const nlohmann::json& j, Section& v);
void to_json(nlohmann::json& j, const ImagePlacement& v);
void from_json(const nlohmann::json& j, ImagePlacement& v);
void to_json(nlohmann::json& j, const ArticleDraft& v);
void from_json(const nlohmann::json& j, ArticleDraft& v);

}  // namespace scribe::core
