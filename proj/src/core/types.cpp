#include "scribe/core/types.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "scribe/errors.hpp"

namespace scribe::core {

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

// FNV-1a 64-bit; stable across platforms, good enough for directory names.
std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

ValidatedTopic validate_topic(const Topic& topic) {
    if (!topic.text && !topic.image) {
        throw_error(Errc::empty_topic, "topic has neither text nor image");
    }
    if (topic.text && is_blank(*topic.text)) {
        throw_error(Errc::empty_text, "topic text is whitespace-only");
    }
    if (topic.image && topic.image->locator.empty()) {
        throw_error(Errc::empty_topic, "topic image has an empty locator");
    }
    Modality modality = Modality::TextOnly;
    if (topic.text && topic.image) {
        modality = Modality::ImageText;
    } else if (topic.image) {
        modality = Modality::ImageOnly;
    }
    ValidatedTopic out{topic, modality};
    if (out.topic.id.empty()) {
        out.topic.id = derive_topic_id(topic.text, topic.image);
    }
    return out;
}

DifficultyLevel classify_difficulty(std::uint64_t char_count) noexcept {
    if (char_count < 100) return DifficultyLevel::ExtremelyHard;
    if (char_count < 300) return DifficultyLevel::VeryHard;
    if (char_count < 500) return DifficultyLevel::Hard;
    return DifficultyLevel::OutOfBenchmark;
}

bool article_invariants_hold(const ArticleDraft& article) {
    std::unordered_set<std::string> urls;
    for (const auto& ref : article.references) {
        if (ref.url.empty() || !urls.insert(ref.url).second) return false;
    }
    for (const auto& section : article.sections) {
        if (section.heading.empty()) return false;
        for (const auto& para : section.paragraphs) {
            for (std::size_t idx : para.citation_indices) {
                if (idx >= article.references.size()) return false;
            }
        }
    }
    for (const auto& placement : article.placements) {
        if (placement.section_index >= article.sections.size()) return false;
        const auto& section = article.sections[placement.section_index];
        if (placement.paragraph_index >= section.paragraphs.size()) return false;
    }
    return true;
}

void validate_article(const ArticleDraft& article) {
    std::unordered_set<std::string> urls;
    for (std::size_t i = 0; i < article.references.size(); ++i) {
        const auto& ref = article.references[i];
        if (ref.url.empty()) {
            throw_error(Errc::invalid_article, "reference " + std::to_string(i) + " has an empty url");
        }
        if (!urls.insert(ref.url).second) {
            throw_error(Errc::invalid_article, "duplicate reference url: " + ref.url);
        }
    }
    for (std::size_t s = 0; s < article.sections.size(); ++s) {
        const auto& section = article.sections[s];
        if (section.heading.empty()) {
            throw_error(Errc::invalid_article, "section " + std::to_string(s) + " has an empty heading");
        }
        for (const auto& para : section.paragraphs) {
            for (std::size_t idx : para.citation_indices) {
                if (idx >= article.references.size()) {
                    throw_error(Errc::invalid_article,
                                "citation index " + std::to_string(idx) + " out of range in section '" +
                                    section.heading + "'");
                }
            }
        }
    }
    for (const auto& placement : article.placements) {
        if (placement.section_index >= article.sections.size() ||
            placement.paragraph_index >= article.sections[placement.section_index].paragraphs.size()) {
            throw_error(Errc::invalid_article, "image placement points outside the article");
        }
    }
}

std::string derive_topic_id(const std::optional<std::string>& text,
                            const std::optional<ImageRef>& image) {
    std::string material;
    if (text) material += *text;
    material += '\x1f';
    if (image) material += image->locator;
    std::uint64_t h = fnv1a64(material);
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::size_t utf8_codepoint_count(std::string_view text) {
    std::size_t count = 0;
    for (unsigned char c : text) {
        if ((c & 0xC0) != 0x80) ++count;  // count non-continuation bytes
    }
    return count;
}

bool plausible_url(std::string_view url) {
    if (url.empty()) return false;
    auto scheme_end = url.find("://");
    if (scheme_end != std::string_view::npos && scheme_end > 0) {
        std::string_view scheme = url.substr(0, scheme_end);
        std::string_view rest = url.substr(scheme_end + 3);
        bool scheme_ok = std::all_of(scheme.begin(), scheme.end(), [](unsigned char c) {
            return std::isalnum(c) != 0 || c == '+' || c == '-' || c == '.';
        });
        return scheme_ok && !rest.empty() && rest.find(' ') == std::string_view::npos;
    }
    // Local paths are accepted for image locators and file-based fixtures.
    return url.find(' ') == std::string_view::npos;
}

std::string_view to_string(Modality modality) {
    switch (modality) {
        case Modality::TextOnly: return "text_only";
        case Modality::ImageOnly: return "image_only";
        case Modality::ImageText: return "image_text";
    }
    return "text_only";
}

std::string_view to_string(DifficultyLevel level) {
    switch (level) {
        case DifficultyLevel::Hard: return "hard";
        case DifficultyLevel::VeryHard: return "very_hard";
        case DifficultyLevel::ExtremelyHard: return "extremely_hard";
        case DifficultyLevel::OutOfBenchmark: return "out_of_benchmark";
    }
    return "hard";
}

Modality modality_from_string(std::string_view name) {
    if (name == "text_only") return Modality::TextOnly;
    if (name == "image_only") return Modality::ImageOnly;
    if (name == "image_text") return Modality::ImageText;
    throw_error(Errc::invalid_argument, "unknown modality: " + std::string(name));
}

DifficultyLevel difficulty_from_string(std::string_view name) {
    if (name == "hard") return DifficultyLevel::Hard;
    if (name == "very_hard") return DifficultyLevel::VeryHard;
    if (name == "extremely_hard") return DifficultyLevel::ExtremelyHard;
    if (name == "out_of_benchmark") return DifficultyLevel::OutOfBenchmark;
    throw_error(Errc::invalid_argument, "unknown difficulty level: " + std::string(name));
}

}  // namespace scribe::core
