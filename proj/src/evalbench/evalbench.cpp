#include "scribe/evalbench/evalbench.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "scribe/errors.hpp"

namespace scribe::evalbench {

namespace {

constexpr const char* kJudgeSystem =
    "You are an article quality judge. Apply the rubric strictly and score from 0 (worst) to 100 "
    "(best). Reply with SCORE: <number> and nothing else.";

const std::pair<const char*, const char*> kRubrics[] = {
#include "rubrics_gen.inc"
};

std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

double parse_score(const std::string& text) {
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        std::string t = trim(line);
        if (t.rfind("SCORE:", 0) != 0) continue;
        try {
            return std::stod(trim(t.substr(6)));
        } catch (const std::exception&) {
            break;
        }
    }
    throw_error(Errc::score_parse_error, "no parsable SCORE: line in judge reply");
}

double judged_score(providers::ChatClient& judge, const std::string& rubric_name,
                    const std::string& material,
                    const std::vector<core::ImageRef>& attachments,
                    const JudgeOptions& options) {
    providers::ChatRequest request;
    request.messages = {{providers::Role::System, kJudgeSystem},
                        {providers::Role::User,
                         std::string("Rubric:\n") + std::string(rubric_text(rubric_name)) +
                             "\n\n" + material}};
    request.attachments = attachments;

    auto response = judge.chat(request);
    double score;
    try {
        score = parse_score(response.text);
    } catch (const Error& e) {
        if (e.code() != Errc::score_parse_error) throw;
        request.messages.push_back({providers::Role::Assistant, response.text});
        request.messages.push_back(
            {providers::Role::User, "Reply again with a single SCORE: <number> line."});
        response = judge.chat(request);
        score = parse_score(response.text);
    }
    if (score < options.min_score || score > options.max_score) {
        std::fprintf(stderr, "[evalbench] %s score %.2f clamped into [%.0f,%.0f]\n",
                     rubric_name.c_str(), score, options.min_score, options.max_score);
        score = std::clamp(score, options.min_score, options.max_score);
    }
    return score;
}

template <typename Map>
double mean_of(const Map& scores) {
    double sum = 0.0;
    for (const auto& [criterion, score] : scores) sum += score;
    return sum / static_cast<double>(scores.size());
}

}  // namespace

TextAspect aspect_of(TextCriterion criterion) {
    switch (criterion) {
        case TextCriterion::Alignment:
        case TextCriterion::Consistency:
        case TextCriterion::Relevance:
        case TextCriterion::Repetition: return TextAspect::ContentQuality;
        case TextCriterion::Breadth:
        case TextCriterion::Depth: return TextAspect::Informativeness;
        case TextCriterion::Verifiability: return TextAspect::Reliability;
        case TextCriterion::Engagement:
        case TextCriterion::Novelty: return TextAspect::Engagement;
    }
    return TextAspect::ContentQuality;
}

std::string_view rubric_text(const std::string& name) {
    for (const auto& [rubric_name, body] : kRubrics) {
        if (name == rubric_name) return body;
    }
    throw_error(Errc::invalid_argument, "no rubric named " + name);
}

TextScores score_text(const core::ArticleDraft& article, const core::Topic& topic,
                      const providers::ProviderHub& hub, const JudgeOptions& options) {
    if (article.sections.empty()) {
        throw_error(Errc::invalid_argument, "cannot score an empty article");
    }
    std::ostringstream material;
    material << "Topic: " << topic.text.value_or("(image topic)") << '\n';
    if (topic.image) material << "Topic image: " << topic.image->locator << '\n';
    material << "\nArticle:\n" << core::to_markdown(article);

    TextScores scores;
    for (TextCriterion criterion : kAllTextCriteria) {
        auto rubric = "text_" + std::string(to_string(criterion));
        scores[criterion] = judged_score(*hub.default_model, rubric, material.str(), {}, options);
    }
    return scores;
}

ImageScores score_images(const core::ArticleDraft& article,
                         const std::vector<visual::PlacedImage>& images,
                         const providers::ProviderHub& hub, const JudgeOptions& options) {
    if (images.empty() || article.placements.empty()) {
        throw_error(Errc::no_images, "article has no placed images to score");
    }
    std::ostringstream material;
    material << "Article:\n" << core::to_markdown(article) << "\nPlaced images:\n";
    std::vector<core::ImageRef> attachments;
    for (std::size_t k = 0; k < images.size(); ++k) {
        const auto& image = images[k];
        material << "Image " << k << ": " << *image.chosen.hit.image_locator << " — "
                 << image.final_caption << " (section " << image.placement.section_index
                 << ", paragraph " << image.placement.paragraph_index << ")\n";
        attachments.push_back({*image.chosen.hit.image_locator, {}});
    }

    ImageScores scores;
    for (ImageCriterion criterion : kAllImageCriteria) {
        auto rubric = "image_" + std::string(to_string(criterion));
        scores[criterion] =
            judged_score(*hub.multimodal_model, rubric, material.str(), attachments, options);
    }
    return scores;
}

EvaluationReport aggregate(const std::string& topic_id, const TextScores& text_scores,
                           const std::optional<ImageScores>& image_scores) {
    for (TextCriterion criterion : kAllTextCriteria) {
        if (!text_scores.count(criterion)) {
            throw_error(Errc::missing_criterion,
                        "text scores lack " + std::string(to_string(criterion)));
        }
    }
    EvaluationReport report;
    report.topic_id = topic_id;
    report.text_scores = text_scores;
    report.overall_text_average = mean_of(text_scores);

    std::map<TextAspect, std::pair<double, int>> per_aspect;
    for (const auto& [criterion, score] : text_scores) {
        auto& [sum, count] = per_aspect[aspect_of(criterion)];
        sum += score;
        ++count;
    }
    for (const auto& [aspect, acc] : per_aspect) {
        report.aspect_averages[aspect] = acc.first / acc.second;
    }

    if (image_scores) {
        for (ImageCriterion criterion : kAllImageCriteria) {
            if (!image_scores->count(criterion)) {
                throw_error(Errc::missing_criterion,
                            "image scores lack " + std::string(to_string(criterion)));
            }
        }
        report.image_scores = *image_scores;
        report.overall_image_average = mean_of(*image_scores);
    }
    return report;
}

namespace {

// splitmix64: tiny, seedable, identical on every platform.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n) by rejection; independent of any library's
    // distribution details.
    std::uint64_t bounded(std::uint64_t n) {
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t value;
        do {
            value = next();
        } while (value >= limit);
        return value % n;
    }
};

}  // namespace

CurationResult curate_topics(const std::function<std::optional<CorpusEntry>()>& next_entry,
                             std::uint64_t per_level_quota, std::uint64_t seed) {
    if (per_level_quota < 1) {
        throw_error(Errc::invalid_argument, "per-level quota must be >= 1");
    }
    CurationResult result;
    result.per_level_quota = per_level_quota;
    result.seed = seed;

    const core::DifficultyLevel levels[] = {core::DifficultyLevel::Hard,
                                            core::DifficultyLevel::VeryHard,
                                            core::DifficultyLevel::ExtremelyHard};
    struct Reservoir {
        std::vector<std::pair<std::uint64_t, CorpusEntry>> kept;  // (stream index, entry)
        std::uint64_t seen = 0;
        SplitMix64 rng{0};
    };
    std::map<core::DifficultyLevel, Reservoir> reservoirs;
    for (std::size_t i = 0; i < 3; ++i) {
        reservoirs[levels[i]].rng = SplitMix64{seed * 0x9E3779B97F4A7C15ull + i + 1};
    }

    std::uint64_t stream_index = 0;
    while (auto entry = next_entry()) {
        ++result.scanned;
        std::uint64_t index = stream_index++;
        if (entry->title.empty()) continue;
        if (entry->body_char_count >= 500) {
            ++result.excluded_char_count;
            continue;
        }
        if (!entry->has_image) {
            ++result.excluded_no_image;
            continue;
        }
        if (entry->flagged_generic) {
            ++result.excluded_flagged;
            continue;
        }
        ++result.eligible;
        auto level = core::classify_difficulty(entry->body_char_count);
        ++result.eligible_per_level[level];

        auto& reservoir = reservoirs[level];
        if (reservoir.kept.size() < per_level_quota) {
            reservoir.kept.emplace_back(index, *entry);
        } else {
            std::uint64_t j = reservoir.rng.bounded(reservoir.seen + 1);
            if (j < per_level_quota) reservoir.kept[j] = {index, *entry};
        }
        ++reservoir.seen;
    }

    for (core::DifficultyLevel level : levels) {
        auto& reservoir = reservoirs[level];
        std::sort(reservoir.kept.begin(), reservoir.kept.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [index, entry] : reservoir.kept) {
            result.selected.push_back({std::move(entry), level});
        }
    }
    return result;
}

nlohmann::json CurationResult::manifest() const {
    nlohmann::json levels = nlohmann::json::object();
    const core::DifficultyLevel order[] = {core::DifficultyLevel::Hard,
                                           core::DifficultyLevel::VeryHard,
                                           core::DifficultyLevel::ExtremelyHard};
    for (core::DifficultyLevel level : order) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& item : selected) {
            if (item.level == level) entries.push_back(item.entry);
        }
        std::uint64_t eligible_count =
            eligible_per_level.count(level) ? eligible_per_level.at(level) : 0;
        levels[std::string(core::to_string(level))] = {
            {"selected", entries},
            {"selected_count", entries.size()},
            {"eligible_count", eligible_count},
            {"shortfall", entries.size() < per_level_quota},
        };
    }
    return nlohmann::json{
        {"seed", seed},
        {"per_level_quota", per_level_quota},
        {"char_count_unit", "unicode_scalar_values_of_plain_text"},
        {"counts",
         {{"scanned", scanned},
          {"eligible", eligible},
          {"excluded_char_count", excluded_char_count},
          {"excluded_no_image", excluded_no_image},
          {"excluded_flagged", excluded_flagged}}},
        {"levels", levels},
    };
}

std::string_view to_string(TextCriterion criterion) {
    switch (criterion) {
        case TextCriterion::Alignment: return "alignment";
        case TextCriterion::Consistency: return "consistency";
        case TextCriterion::Relevance: return "relevance";
        case TextCriterion::Repetition: return "repetition";
        case TextCriterion::Breadth: return "breadth";
        case TextCriterion::Depth: return "depth";
        case TextCriterion::Verifiability: return "verifiability";
        case TextCriterion::Engagement: return "engagement";
        case TextCriterion::Novelty: return "novelty";
    }
    return "alignment";
}

std::string_view to_string(TextAspect aspect) {
    switch (aspect) {
        case TextAspect::ContentQuality: return "content_quality";
        case TextAspect::Informativeness: return "informativeness";
        case TextAspect::Reliability: return "reliability";
        case TextAspect::Engagement: return "engagement";
    }
    return "content_quality";
}

std::string_view to_string(ImageCriterion criterion) {
    switch (criterion) {
        case ImageCriterion::ImageTextCoherence: return "image_text_coherence";
        case ImageCriterion::Engagement: return "engagement";
        case ImageCriterion::Helpfulness: return "helpfulness";
        case ImageCriterion::InformationSupplement: return "information_supplement";
    }
    return "image_text_coherence";
}

TextCriterion text_criterion_from_string(std::string_view name) {
    for (TextCriterion criterion : kAllTextCriteria) {
        if (name == to_string(criterion)) return criterion;
    }
    throw_error(Errc::invalid_argument, "unknown text criterion: " + std::string(name));
}

ImageCriterion image_criterion_from_string(std::string_view name) {
    for (ImageCriterion criterion : kAllImageCriteria) {
        if (name == to_string(criterion)) return criterion;
    }
    throw_error(Errc::invalid_argument, "unknown image criterion: " + std::string(name));
}

void to_json(nlohmann::json& j, const EvaluationReport& v) {
    nlohmann::json text = nlohmann::json::object();
    for (const auto& [criterion, score] : v.text_scores) {
        text[std::string(to_string(criterion))] = score;
    }
    nlohmann::json aspects = nlohmann::json::object();
    for (const auto& [aspect, score] : v.aspect_averages) {
        aspects[std::string(to_string(aspect))] = score;
    }
    j = nlohmann::json{{"topic_id", v.topic_id},
                       {"text_scores", text},
                       {"aspect_averages", aspects},
                       {"overall_text_average", v.overall_text_average}};
    if (v.image_scores) {
        nlohmann::json image = nlohmann::json::object();
        for (const auto& [criterion, score] : *v.image_scores) {
            image[std::string(to_string(criterion))] = score;
        }
        j["image_scores"] = image;
        j["overall_image_average"] = *v.overall_image_average;
    }
}

void from_json(const nlohmann::json& j, EvaluationReport& v) {
    v = EvaluationReport{};
    j.at("topic_id").get_to(v.topic_id);
    for (const auto& [name, score] : j.at("text_scores").items()) {
        v.text_scores[text_criterion_from_string(name)] = score.get<double>();
    }
    for (const auto& [name, score] : j.at("aspect_averages").items()) {
        for (TextAspect aspect : {TextAspect::ContentQuality, TextAspect::Informativeness,
                                  TextAspect::Reliability, TextAspect::Engagement}) {
            if (name == to_string(aspect)) v.aspect_averages[aspect] = score.get<double>();
        }
    }
    j.at("overall_text_average").get_to(v.overall_text_average);
    if (j.contains("image_scores")) {
        ImageScores image;
        for (const auto& [name, score] : j.at("image_scores").items()) {
            image[image_criterion_from_string(name)] = score.get<double>();
        }
        v.image_scores = image;
        v.overall_image_average = j.at("overall_image_average").get<double>();
    }
}

void to_json(nlohmann::json& j, const CorpusEntry& v) {
    j = nlohmann::json{{"title", v.title},
                       {"body_char_count", v.body_char_count},
                       {"has_image", v.has_image},
                       {"flagged_generic", v.flagged_generic}};
}

void from_json(const nlohmann::json& j, CorpusEntry& v) {
    j.at("title").get_to(v.title);
    j.at("body_char_count").get_to(v.body_char_count);
    j.at("has_image").get_to(v.has_image);
    v.flagged_generic = j.value("flagged_generic", false);
}

}  // namespace scribe::evalbench
