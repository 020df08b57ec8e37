#include "scribe/composer/composer.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "scribe/errors.hpp"

namespace scribe::composer {

namespace {

constexpr const char* kSummarizerSystem =
    "You are a research summarizer. Condense the numbered evidence into factual bullets for the "
    "section. Reply one per line as BULLET: <claim> [n] with at least one evidence label each.";

constexpr const char* kSectionWriterSystem =
    "You are an encyclopedia section writer. Write the section as plain paragraphs separated by "
    "blank lines. Support claims with bracketed evidence labels like [1]; labels are 1-based into "
    "the evidence list.";

constexpr const char* kSectionReviserSystem =
    "You are an encyclopedia section writer revising a draft. Apply the reviewer suggestions and "
    "reply with the full rewritten section in the same paragraph-and-label format.";

std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

// Extracts [n] labels, validates them against the 1-based label range, and
// returns the text with the markers removed.
struct MarkedText {
    std::string text;
    std::vector<std::size_t> labels;  // 1-based, in appearance order, deduplicated
};

MarkedText parse_markers(const std::string& text, std::size_t label_count, Errc parse_errc) {
    MarkedText out;
    std::string cleaned;
    cleaned.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '[') {
            std::size_t j = i + 1;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            if (j > i + 1 && j < text.size() && text[j] == ']') {
                std::size_t label = std::stoull(text.substr(i + 1, j - i - 1));
                if (label == 0) {
                    throw Error(parse_errc, "citation markers are 1-based; found [0]");
                }
                if (label > label_count) {
                    throw Error(parse_errc, "citation marker [" + std::to_string(label) +
                                                "] exceeds the " + std::to_string(label_count) +
                                                " listed evidence items");
                }
                if (std::find(out.labels.begin(), out.labels.end(), label) == out.labels.end()) {
                    out.labels.push_back(label);
                }
                i = j + 1;
                // Swallow the space left dangling by the removed marker,
                // whether the marker was followed by more text or by
                // punctuation.
                if (!cleaned.empty() && cleaned.back() == ' ') {
                    if (i < text.size() && text[i] == ' ') {
                        ++i;
                    } else if (i >= text.size() ||
                               std::ispunct(static_cast<unsigned char>(text[i]))) {
                        cleaned.pop_back();
                    }
                }
                continue;
            }
        }
        cleaned.push_back(text[i]);
        ++i;
    }
    out.text = trim(cleaned);
    return out;
}

std::vector<std::string> split_paragraphs(const std::string& text) {
    std::vector<std::string> paragraphs;
    std::string current;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        if (trim(line).empty()) {
            if (!trim(current).empty()) paragraphs.push_back(trim(current));
            current.clear();
        } else {
            if (!current.empty()) current += ' ';
            current += trim(line);
        }
    }
    if (!trim(current).empty()) paragraphs.push_back(trim(current));
    return paragraphs;
}

}  // namespace

std::vector<std::size_t> SectionNotes::evidence_universe() const {
    std::vector<std::size_t> universe;
    for (const auto& bullet : bullets) {
        for (std::size_t index : bullet.evidence_indices) {
            if (std::find(universe.begin(), universe.end(), index) == universe.end()) {
                universe.push_back(index);
            }
        }
    }
    return universe;
}

SectionNotes summarize_evidence(const exploration::EvidenceBank& bank,
                                const outline::OutlineSection& section,
                                const providers::ProviderHub& hub) {
    SectionNotes notes;
    notes.section_heading = section.heading;
    if (bank.items.empty()) return notes;

    // Bank indices in scope for this section; the whole bank if none match.
    std::vector<std::size_t> scope;
    for (std::size_t i = 0; i < bank.items.size(); ++i) {
        if (bank.items[i].section_headings.count(section.heading)) scope.push_back(i);
    }
    if (scope.empty()) {
        scope.resize(bank.items.size());
        for (std::size_t i = 0; i < scope.size(); ++i) scope[i] = i;
    }

    std::ostringstream user;
    user << "Section: " << section.heading << '\n' << "Evidence:\n";
    for (std::size_t label = 0; label < scope.size(); ++label) {
        const auto& item = bank.items[scope[label]];
        user << '[' << (label + 1) << "] " << item.citation.title << " — " << item.content << '\n';
    }

    providers::ChatRequest request;
    request.messages = {{providers::Role::System, kSummarizerSystem},
                        {providers::Role::User, user.str()}};

    auto parse_reply = [&](const std::string& text) {
        SectionNotes parsed;
        parsed.section_heading = section.heading;
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            std::string t = trim(line);
            if (t.rfind("BULLET:", 0) != 0) continue;
            auto marked = parse_markers(t.substr(7), scope.size(), Errc::notes_parse_error);
            if (marked.labels.empty()) {
                throw_error(Errc::notes_parse_error, "bullet cites no evidence: " + t);
            }
            SectionNotes::Bullet bullet;
            bullet.claim = marked.text;
            for (std::size_t label : marked.labels) bullet.evidence_indices.push_back(scope[label - 1]);
            parsed.bullets.push_back(std::move(bullet));
        }
        if (parsed.bullets.empty()) {
            throw_error(Errc::notes_parse_error, "reply carried no BULLET: lines");
        }
        return parsed;
    };

    auto response = hub.default_model->chat(request);
    try {
        return parse_reply(response.text);
    } catch (const Error& e) {
        if (e.code() != Errc::notes_parse_error) throw;
        request.messages.push_back({providers::Role::Assistant, response.text});
        request.messages.push_back({providers::Role::User,
                                    "Reply again using only BULLET: lines, each citing at least one "
                                    "listed evidence label."});
        response = hub.default_model->chat(request);
        return parse_reply(response.text);
    }
}

namespace {

std::string render_notes(const SectionNotes& notes, const std::vector<std::size_t>& universe) {
    // Labels shown to the writer are positions in the universe, not raw bank
    // indices, so the prompt and the parser always agree.
    std::unordered_map<std::size_t, std::size_t> label_of;
    for (std::size_t i = 0; i < universe.size(); ++i) label_of[universe[i]] = i + 1;

    std::ostringstream out;
    for (const auto& bullet : notes.bullets) {
        out << "- " << bullet.claim;
        for (std::size_t index : bullet.evidence_indices) out << " [" << label_of.at(index) << ']';
        out << '\n';
    }
    return out.str();
}

core::Section parse_section_reply(const std::string& text, const std::string& heading,
                                  const std::vector<std::size_t>& universe) {
    core::Section section;
    section.heading = heading;
    for (const auto& paragraph_text : split_paragraphs(text)) {
        auto marked = parse_markers(paragraph_text, universe.size(), Errc::draft_parse_error);
        core::Paragraph paragraph;
        paragraph.text = marked.text;
        for (std::size_t label : marked.labels) {
            paragraph.citation_indices.push_back(universe[label - 1]);
        }
        if (!paragraph.text.empty()) section.paragraphs.push_back(std::move(paragraph));
    }
    if (section.paragraphs.empty()) {
        throw_error(Errc::draft_parse_error, "draft reply contained no paragraphs");
    }
    return section;
}

}  // namespace

core::Section draft_section(const outline::OutlineSection& section, const SectionNotes& notes,
                            const std::string& prior_context, const providers::ProviderHub& hub) {
    if (notes.section_heading != section.heading) {
        throw_error(Errc::invalid_argument, "notes belong to section '" + notes.section_heading +
                                                "', not '" + section.heading + "'");
    }
    auto universe = notes.evidence_universe();

    std::ostringstream user;
    user << "Section heading: " << section.heading << '\n';
    for (const auto& question : section.guiding_questions) {
        user << "Guiding question: " << question << '\n';
    }
    if (!prior_context.empty()) {
        user << "Article so far:\n" << prior_context << '\n';
    }
    if (!notes.bullets.empty()) {
        user << "Evidence notes:\n" << render_notes(notes, universe);
    } else {
        user << "No evidence notes are available; write a brief neutral stub.\n";
    }

    providers::ChatRequest request;
    request.messages = {{providers::Role::System, kSectionWriterSystem},
                        {providers::Role::User, user.str()}};
    auto response = hub.default_model->chat(request);
    try {
        return parse_section_reply(response.text, section.heading, universe);
    } catch (const Error& e) {
        if (e.code() != Errc::draft_parse_error) throw;
        request.messages.push_back({providers::Role::Assistant, response.text});
        request.messages.push_back({providers::Role::User,
                                    "That draft was malformed (" + std::string(e.what()) +
                                        "). Reply again with plain paragraphs and valid labels."});
        response = hub.default_model->chat(request);
        return parse_section_reply(response.text, section.heading, universe);
    }
}

std::string render_section_markup(const core::Section& section, const SectionNotes& notes) {
    auto universe = notes.evidence_universe();
    std::unordered_map<std::size_t, std::size_t> label_of;
    for (std::size_t i = 0; i < universe.size(); ++i) label_of[universe[i]] = i + 1;

    std::ostringstream out;
    for (std::size_t p = 0; p < section.paragraphs.size(); ++p) {
        const auto& paragraph = section.paragraphs[p];
        out << paragraph.text;
        for (std::size_t index : paragraph.citation_indices) {
            auto it = label_of.find(index);
            if (it != label_of.end()) out << " [" << it->second << ']';
        }
        if (p + 1 < section.paragraphs.size()) out << "\n\n";
    }
    return out.str();
}

core::Section refine_section(const core::Section& section, const SectionNotes& notes,
                             const reflection::ReflectionFeedback& feedback,
                             const std::string& prior_context, const providers::ProviderHub& hub) {
    if (feedback.verdict != reflection::Verdict::Revise) {
        throw_error(Errc::invalid_argument, "refine_section requires a revise verdict");
    }
    auto universe = notes.evidence_universe();

    std::ostringstream user;
    user << "Section heading: " << section.heading << '\n';
    if (!prior_context.empty()) {
        user << "Article so far:\n" << prior_context << '\n';
    }
    user << "Current draft:\n" << render_section_markup(section, notes) << '\n';
    if (!notes.bullets.empty()) {
        user << "Evidence notes:\n" << render_notes(notes, universe);
    }
    user << "Reviewer suggestions:\n";
    for (const auto& suggestion : feedback.suggestions) {
        user << "- " << suggestion << '\n';
    }

    providers::ChatRequest request;
    request.messages = {{providers::Role::System, kSectionReviserSystem},
                        {providers::Role::User, user.str()}};
    auto response = hub.default_model->chat(request);
    try {
        return parse_section_reply(response.text, section.heading, universe);
    } catch (const Error& e) {
        if (e.code() != Errc::draft_parse_error) throw;
        request.messages.push_back({providers::Role::Assistant, response.text});
        request.messages.push_back({providers::Role::User,
                                    "That revision was malformed (" + std::string(e.what()) +
                                        "). Reply again with plain paragraphs and valid labels."});
        response = hub.default_model->chat(request);
        return parse_section_reply(response.text, section.heading, universe);
    }
}

core::ArticleDraft assemble_article(const std::string& topic_id,
                                    const std::vector<core::Section>& sections,
                                    const exploration::EvidenceBank& bank) {
    if (sections.empty()) {
        throw_error(Errc::invalid_argument, "cannot assemble an article without sections");
    }
    core::ArticleDraft article;
    article.topic_id = topic_id;
    article.sections = sections;

    std::unordered_map<std::size_t, std::size_t> reference_of;  // bank index -> reference index
    for (auto& section : article.sections) {
        for (auto& paragraph : section.paragraphs) {
            std::vector<std::size_t> remapped;
            for (std::size_t bank_index : paragraph.citation_indices) {
                if (bank_index >= bank.items.size()) {
                    throw_error(Errc::dangling_citation,
                                "citation index " + std::to_string(bank_index) +
                                    " has no bank entry (bank size " +
                                    std::to_string(bank.items.size()) + ")");
                }
                auto [it, inserted] = reference_of.try_emplace(bank_index, article.references.size());
                if (inserted) {
                    article.references.push_back(bank.items[bank_index].citation);
                }
                if (std::find(remapped.begin(), remapped.end(), it->second) == remapped.end()) {
                    remapped.push_back(it->second);
                }
            }
            paragraph.citation_indices = std::move(remapped);
        }
    }
    core::validate_article(article);
    return article;
}

core::ArticleDraft compose_article(const std::string& topic_id, const outline::OutlinePlan& plan,
                                   const exploration::EvidenceBank& bank,
                                   const providers::ProviderHub& hub,
                                   reflection::Engine& reflector, const ComposeOptions& options) {
    std::vector<core::Section> sections;
    std::string running_context;

    for (const auto& outline_section : plan.sections) {
        auto notes = summarize_evidence(bank, outline_section, hub);
        auto initial = draft_section(outline_section, notes, running_context, hub);

        auto reflect_fn = [&](const core::Section& candidate) {
            auto request = reflection::ReflectionRequest::make(
                reflection::Viewpoint::Writer,
                {reflection::PayloadKind::SectionDraft,
                 "## " + candidate.heading + "\n\n" + render_section_markup(candidate, notes),
                 {}},
                {reflection::Criterion::Coherence, reflection::Criterion::Readability},
                "Drafting section '" + outline_section.heading + "' of the article");
            return reflector.reflect(request);
        };
        auto regenerate = [&](const core::Section& candidate,
                              const reflection::ReflectionFeedback& feedback) {
            return refine_section(candidate, notes, feedback, running_context, hub);
        };
        auto outcome = reflection::refine_loop<core::Section>(initial, reflect_fn, regenerate,
                                                              options.max_reflect_iters);
        sections.push_back(outcome.artifact);

        if (options.full_article_context) {
            running_context += "## " + outcome.artifact.heading + "\n";
            for (const auto& paragraph : outcome.artifact.paragraphs) {
                running_context += paragraph.text + "\n";
            }
        } else {
            // Running summary: heading plus the lead sentence of the section.
            std::string lead = outcome.artifact.paragraphs.empty()
                                   ? ""
                                   : outcome.artifact.paragraphs.front().text;
            auto period = lead.find(". ");
            if (period != std::string::npos) lead = lead.substr(0, period + 1);
            running_context += "## " + outcome.artifact.heading + ": " + lead + "\n";
        }
    }
    return assemble_article(topic_id, sections, bank);
}

}  // namespace scribe::composer
