#include "scribe/outline/outline.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "scribe/errors.hpp"

namespace scribe::outline {

namespace {

std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

std::string fold(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

constexpr const char* kAnalystSystem =
    "You are a topic analyst. Identify what the given topic is about. Reply with a TITLE: line, "
    "a DESCRIPTION: line, and optional KEYWORD: lines (one entity each).";

constexpr const char* kTitleEditorSystem =
    "You are a title editor. Merge the topic text and the keywords gathered from its image into "
    "one refined article subject. Reply with a TITLE: line and a DESCRIPTION: line.";

constexpr const char* kOutlinePlannerSystem =
    "You are an outline planner for a reference article. Reply with Markdown ATX headings only: "
    "'# ' for sections, '## ' for subsections, optionally '- ' bullets with guiding questions "
    "under a heading. No other prose.";

constexpr const char* kEntityListerSystem =
    "You are an entity tagger. List the named entities in the text, one per line, "
    "as ENTITY: <name>.";

struct TitleReply {
    std::string title;
    std::string description;
    std::vector<std::string> keywords;
};

TitleReply parse_title_reply(const std::string& text) {
    TitleReply reply;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        std::string t = trim(line);
        if (t.rfind("TITLE:", 0) == 0 && reply.title.empty()) {
            reply.title = trim(t.substr(6));
        } else if (t.rfind("DESCRIPTION:", 0) == 0 && reply.description.empty()) {
            reply.description = trim(t.substr(12));
        } else if (t.rfind("KEYWORD:", 0) == 0) {
            auto keyword = trim(t.substr(8));
            if (!keyword.empty()) reply.keywords.push_back(std::move(keyword));
        }
    }
    return reply;
}

// Chat once, retry once with a reminder if no TITLE: came back.
TitleReply titled_chat(providers::ChatClient& model, const std::string& system,
                       const std::string& user) {
    providers::ChatRequest request;
    request.messages = {{providers::Role::System, system}, {providers::Role::User, user}};
    auto response = model.chat(request);
    auto parsed = parse_title_reply(response.text);
    if (!parsed.title.empty()) return parsed;

    request.messages.push_back({providers::Role::Assistant, response.text});
    request.messages.push_back(
        {providers::Role::User, "Your reply had no TITLE: line. Reply again in the required format."});
    response = model.chat(request);
    parsed = parse_title_reply(response.text);
    if (parsed.title.empty()) {
        throw_error(Errc::empty_brief, "model produced no parsable title after a retry");
    }
    return parsed;
}

std::vector<std::string> dedup_keep_order(const std::vector<std::string>& items, std::size_t cap) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& item : items) {
        if (out.size() == cap) break;
        if (seen.insert(fold(item)).second) out.push_back(item);
    }
    return out;
}

}  // namespace

std::vector<std::string> CapitalizedNgramExtractor::extract(const std::string& text) {
    std::vector<std::string> candidates;
    std::string run;
    bool run_open = false;

    auto close_run = [&] {
        if (run_open && !run.empty()) candidates.push_back(run);
        run.clear();
        run_open = false;
    };

    std::istringstream stream(text);
    std::string token;
    while (stream >> token) {
        // Strip surrounding punctuation; remember whether the token ended a
        // clause, which also ends the entity run.
        std::size_t begin = 0, end = token.size();
        while (begin < end && std::ispunct(static_cast<unsigned char>(token[begin]))) ++begin;
        bool clause_end = false;
        while (end > begin && std::ispunct(static_cast<unsigned char>(token[end - 1]))) {
            char c = token[end - 1];
            if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?') clause_end = true;
            --end;
        }
        std::string word = token.substr(begin, end - begin);
        if (!word.empty() && std::isupper(static_cast<unsigned char>(word[0]))) {
            if (run_open) run += ' ';
            run += word;
            run_open = true;
            if (clause_end) close_run();
        } else {
            close_run();
        }
    }
    close_run();
    return candidates;
}

std::vector<std::string> LlmEntityExtractor::extract(const std::string& text) {
    providers::ChatRequest request;
    request.messages = {{providers::Role::System, kEntityListerSystem},
                        {providers::Role::User, text}};
    auto response = model_->chat(request);
    std::vector<std::string> out;
    std::istringstream stream(response.text);
    std::string line;
    while (std::getline(stream, line)) {
        std::string t = trim(line);
        if (t.rfind("ENTITY:", 0) == 0) {
            auto entity = trim(t.substr(7));
            if (!entity.empty()) out.push_back(std::move(entity));
        }
    }
    return out;
}

std::vector<std::string> extract_keywords(const std::vector<std::string>& texts,
                                          EntityExtractor& extractor, std::size_t k) {
    if (k < 1) throw_error(Errc::invalid_argument, "keyword k must be >= 1");

    struct Tally {
        std::size_t count = 0;
        std::size_t first_seen = 0;
        std::string surface;
    };
    std::map<std::string, Tally> tallies;  // folded form -> tally
    std::size_t position = 0;
    for (const auto& text : texts) {
        for (auto& candidate : extractor.extract(text)) {
            auto key = fold(candidate);
            auto [it, inserted] = tallies.try_emplace(key);
            if (inserted) {
                it->second.first_seen = position;
                it->second.surface = candidate;
            }
            ++it->second.count;
            ++position;
        }
    }

    std::vector<std::pair<std::string, Tally>> ranked(tallies.begin(), tallies.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second.count != b.second.count) return a.second.count > b.second.count;
        if (a.second.first_seen != b.second.first_seen) return a.second.first_seen < b.second.first_seen;
        return a.first < b.first;
    });

    std::vector<std::string> out;
    for (const auto& [key, tally] : ranked) {
        if (out.size() == k) break;
        out.push_back(tally.surface);
    }
    return out;
}

TopicBrief interpret_topic(const core::ValidatedTopic& topic, const providers::ProviderHub& hub,
                           EntityExtractor& extractor, const OutlineOptions& options) {
    TopicBrief brief;
    brief.modality = topic.modality;

    if (topic.modality != core::Modality::TextOnly) {
        const auto& image = *topic.topic.image;
        std::string query = image.locator;
        if (image.alt_text && !image.alt_text->empty()) query += " " + *image.alt_text;
        providers::SearchRequest request{query, options.metadata_search_k, providers::SearchKind::Web};
        brief.metadata_hits = hub.web_search->search(request);

        std::vector<std::string> texts;
        for (const auto& hit : brief.metadata_hits) {
            texts.push_back(hit.title);
            texts.push_back(hit.snippet);
        }
        brief.keywords = extract_keywords(texts, extractor, options.keyword_k);
        for (const auto& hit : brief.metadata_hits) {
            if (!brief.description.empty()) brief.description += ' ';
            brief.description += hit.snippet;
            if (brief.description.size() > 600) break;
        }
    }

    switch (topic.modality) {
        case core::Modality::TextOnly: {
            auto reply = titled_chat(*hub.default_model, kAnalystSystem,
                                     "Topic text: " + *topic.topic.text);
            brief.refined_title = reply.title;
            brief.description = reply.description;
            brief.keywords = dedup_keep_order(reply.keywords, options.keyword_k);
            break;
        }
        case core::Modality::ImageOnly: {
            if (!brief.metadata_hits.empty()) {
                brief.refined_title = brief.metadata_hits.front().title;
            } else if (topic.topic.image->alt_text && !topic.topic.image->alt_text->empty()) {
                brief.refined_title = *topic.topic.image->alt_text;
                brief.description = *topic.topic.image->alt_text;
            } else {
                throw_error(Errc::empty_brief,
                            "image-only topic with no metadata hits and no alt text");
            }
            break;
        }
        case core::Modality::ImageText: {
            std::ostringstream user;
            user << "Topic text: " << *topic.topic.text << '\n';
            if (!brief.keywords.empty()) {
                user << "Image keywords:";
                for (const auto& keyword : brief.keywords) user << ' ' << keyword;
                user << '\n';
            }
            auto reply = titled_chat(*hub.default_model, kTitleEditorSystem, user.str());
            brief.refined_title = reply.title;
            if (!reply.description.empty()) brief.description = reply.description;
            break;
        }
    }

    if (brief.refined_title.empty()) {
        throw_error(Errc::empty_brief, "interpretation produced no title");
    }
    return brief;
}

OutlinePlan parse_outline_markup(const std::string& text, const std::string& topic_id) {
    OutlinePlan plan;
    plan.topic_id = topic_id;
    std::istringstream stream(text);
    std::string raw_line;
    while (std::getline(stream, raw_line)) {
        std::string line = trim(raw_line);
        if (line.empty()) continue;
        if (line.rfind("## ", 0) == 0) {
            if (plan.sections.empty() || plan.sections.back().depth > 2) {
                throw_error(Errc::outline_parse_error, "subsection without a parent section");
            }
            plan.sections.push_back({trim(line.substr(3)), {}, 2});
        } else if (line.rfind("# ", 0) == 0) {
            plan.sections.push_back({trim(line.substr(2)), {}, 1});
        } else if (line.rfind("- ", 0) == 0) {
            if (plan.sections.empty()) {
                throw_error(Errc::outline_parse_error, "guiding question before any heading");
            }
            plan.sections.back().guiding_questions.push_back(trim(line.substr(2)));
        } else {
            throw_error(Errc::outline_parse_error, "unexpected outline line: " + line);
        }
    }
    validate_outline(plan);
    return plan;
}

std::string outline_to_markup(const OutlinePlan& plan) {
    std::ostringstream out;
    for (const auto& section : plan.sections) {
        out << (section.depth == 2 ? "## " : "# ") << section.heading << '\n';
        for (const auto& question : section.guiding_questions) {
            out << "- " << question << '\n';
        }
    }
    return out.str();
}

void validate_outline(const OutlinePlan& plan) {
    if (plan.sections.empty()) {
        throw_error(Errc::outline_parse_error, "outline has no sections");
    }
    std::unordered_set<std::string> headings;
    bool have_parent = false;
    for (const auto& section : plan.sections) {
        if (section.heading.empty()) {
            throw_error(Errc::outline_parse_error, "outline has an empty heading");
        }
        if (section.depth != 1 && section.depth != 2) {
            throw_error(Errc::outline_parse_error, "outline depth must be 1 or 2");
        }
        if (section.depth == 2 && !have_parent) {
            throw_error(Errc::outline_parse_error, "depth-2 section without a preceding parent");
        }
        if (section.depth == 1) have_parent = true;
        if (!headings.insert(fold(section.heading)).second) {
            throw_error(Errc::outline_parse_error, "duplicate heading: " + section.heading);
        }
    }
}

OutlinePlan propose_outline(const TopicBrief& brief, const std::string& topic_id,
                            const providers::ProviderHub& hub, const OutlineOptions& options) {
    std::ostringstream user;
    user << "Subject: " << brief.refined_title << '\n';
    if (!brief.description.empty()) user << "Description: " << brief.description << '\n';
    if (!brief.keywords.empty()) {
        user << "Keywords:";
        for (const auto& keyword : brief.keywords) user << ' ' << keyword;
        user << '\n';
    }
    user << "Plan at most " << options.max_sections << " sections.";

    providers::ChatRequest request;
    request.messages = {{providers::Role::System, kOutlinePlannerSystem},
                        {providers::Role::User, user.str()}};
    auto response = hub.default_model->chat(request);

    OutlinePlan plan;
    try {
        plan = parse_outline_markup(response.text, topic_id);
    } catch (const Error& e) {
        if (e.code() != Errc::outline_parse_error) throw;
        request.messages.push_back({providers::Role::Assistant, response.text});
        request.messages.push_back({providers::Role::User,
                                    "That was not valid outline markup (" + std::string(e.what()) +
                                        "). Reply again with '# '/'## ' headings only."});
        response = hub.default_model->chat(request);
        plan = parse_outline_markup(response.text, topic_id);
    }

    if (plan.sections.size() > options.max_sections) {
        plan.sections.resize(options.max_sections);
    }
    return plan;
}

void to_json(nlohmann::json& j, const OutlineSection& v) {
    j = nlohmann::json{{"heading", v.heading},
                       {"guiding_questions", v.guiding_questions},
                       {"depth", v.depth}};
}

void from_json(const nlohmann::json& j, OutlineSection& v) {
    j.at("heading").get_to(v.heading);
    j.at("guiding_questions").get_to(v.guiding_questions);
    j.at("depth").get_to(v.depth);
}

void to_json(nlohmann::json& j, const OutlinePlan& v) {
    j = nlohmann::json{{"topic_id", v.topic_id}, {"sections", v.sections}};
}

void from_json(const nlohmann::json& j, OutlinePlan& v) {
    j.at("topic_id").get_to(v.topic_id);
    j.at("sections").get_to(v.sections);
}

}  // namespace scribe::outline
