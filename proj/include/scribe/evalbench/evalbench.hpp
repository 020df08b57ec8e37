#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scribe/core/types.hpp"
#include "scribe/providers/clients.hpp"
#include "scribe/visual/visual.hpp"

namespace scribe::evalbench {

// Nine text criteria in four aspects.
enum class TextCriterion {
    Alignment,
    Consistency,
    Relevance,
    Repetition,   // content quality
    Breadth,
    Depth,        // informativeness
    Verifiability,  // reliability
    Engagement,
    Novelty,      // engagement
};

inline constexpr TextCriterion kAllTextCriteria[] = {
    TextCriterion::Alignment,  TextCriterion::Consistency, TextCriterion::Relevance,
    TextCriterion::Repetition, TextCriterion::Breadth,     TextCriterion::Depth,
    TextCriterion::Verifiability, TextCriterion::Engagement, TextCriterion::Novelty,
};

enum class TextAspect { ContentQuality, Informativeness, Reliability, Engagement };

TextAspect aspect_of(TextCriterion criterion);

enum class ImageCriterion { ImageTextCoherence, Engagement, Helpfulness, InformationSupplement };

inline constexpr ImageCriterion kAllImageCriteria[] = {
    ImageCriterion::ImageTextCoherence,
    ImageCriterion::Engagement,
    ImageCriterion::Helpfulness,
    ImageCriterion::InformationSupplement,
};

using TextScores = std::map<TextCriterion, double>;
using ImageScores = std::map<ImageCriterion, double>;

struct EvaluationReport {
    std::string topic_id;
    TextScores text_scores;                 // all in [0,100]
    std::optional<ImageScores> image_scores;
    std::map<TextAspect, double> aspect_averages;
    double overall_text_average = 0.0;
    std::optional<double> overall_image_average;
};

struct CorpusEntry {
    std::string title;
    std::uint64_t body_char_count = 0;
    bool has_image = false;
    bool flagged_generic = false;  // manual-review exclusion flag
};

// The exact rubric body shipped for one criterion ("text_alignment",
// "image_helpfulness", ...). Throws InvalidArgument for unknown names.
std::string_view rubric_text(const std::string& name);

struct JudgeOptions {
    double min_score = 0.0;
    double max_score = 100.0;
};

// One judge call per criterion against the default model slot. Scores are
// parsed from a SCORE: line and clamped into [0,100] with a warning;
// ScoreParseError after one re-prompt per criterion.
TextScores score_text(const core::ArticleDraft& article, const core::Topic& topic,
                      const providers::ProviderHub& hub, const JudgeOptions& options = {});

// Multimodal judge per image criterion. Throws NoImages when nothing is
// placed.
ImageScores score_images(const core::ArticleDraft& article,
                         const std::vector<visual::PlacedImage>& images,
                         const providers::ProviderHub& hub, const JudgeOptions& options = {});

// Pure, deterministic aggregation: aspect averages plus overall arithmetic
// means. Requires all nine text criteria (and all four image criteria when
// image scores are given); throws MissingCriterion otherwise.
EvaluationReport aggregate(const std::string& topic_id, const TextScores& text_scores,
                           const std::optional<ImageScores>& image_scores = std::nullopt);

struct CurationResult {
    struct Selected {
        CorpusEntry entry;
        core::DifficultyLevel level;
    };
    std::vector<Selected> selected;  // stream order within each level
    std::uint64_t scanned = 0;
    std::uint64_t eligible = 0;
    std::uint64_t excluded_char_count = 0;
    std::uint64_t excluded_no_image = 0;
    std::uint64_t excluded_flagged = 0;
    std::map<core::DifficultyLevel, std::uint64_t> eligible_per_level;
    std::uint64_t per_level_quota = 0;
    std::uint64_t seed = 0;

    nlohmann::json manifest() const;
};

// Streaming curation: keeps entries shorter than 500 characters that carry an
// image and are not flagged, labels them with classify_difficulty, and
// reservoir-samples up to per_level_quota per level under the given seed.
// Quota shortfalls are reported in the manifest, never an error.
CurationResult curate_topics(const std::function<std::optional<CorpusEntry>()>& next_entry,
                             std::uint64_t per_level_quota, std::uint64_t seed);

std::string_view to_string(TextCriterion criterion);
std::string_view to_string(TextAspect aspect);
std::string_view to_string(ImageCriterion criterion);
TextCriterion text_criterion_from_string(std::string_view name);
ImageCriterion image_criterion_from_string(std::string_view name);

void to_json(nlohmann::json& j, const EvaluationReport& v);
void from_json(const nlohmann::json& j, EvaluationReport& v);
void to_json(nlohmann::json& j, const CorpusEntry& v);
void from_json(const nlohmann::json& j, CorpusEntry& v);

}  // namespace scribe::evalbench
