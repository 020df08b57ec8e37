#include "scribe/exploration/exploration.hpp"

#include <algorithm>
#include <future>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "scribe/errors.hpp"

namespace scribe::exploration {

namespace {

constexpr std::size_t kSnippetCap = 1500;  // per-hit snippet budget in prompts

constexpr const char* kPersonaCasterSystem =
    "You are assembling a research panel for an article. Propose the requested number of distinct "
    "personas. Reply one per line as PERSONA: <name> | <role description> | <objective>.";

constexpr const char* kAskerSystem =
    "You are the asker leading a research discussion. Pose one targeted question that moves the "
    "current section forward. Reply as QUESTION: <text>.";

constexpr const char* kQueryPlannerSystem =
    "You are a search strategist. Propose web search queries that would answer the question from "
    "your persona's angle. Reply one per line as QUERY: <text>.";

constexpr const char* kPersonaAnswerSystem =
    "You are answering as the persona described below. Ground your answer in the numbered sources "
    "when they are given; otherwise answer from the discussion so far.";

std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

std::string truncated(std::string_view s, std::size_t cap) {
    if (s.size() <= cap) return std::string(s);
    return std::string(s.substr(0, cap));
}

std::vector<std::string> parse_prefixed_lines(const std::string& text, std::string_view prefix) {
    std::vector<std::string> out;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        std::string t = trim(line);
        if (t.rfind(prefix, 0) == 0) {
            auto value = trim(t.substr(prefix.size()));
            if (!value.empty()) out.push_back(std::move(value));
        }
    }
    return out;
}

std::vector<Persona> parse_personas(const std::string& text) {
    std::vector<Persona> personas;
    for (const auto& line : parse_prefixed_lines(text, "PERSONA:")) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            auto bar = line.find('|', start);
            if (bar == std::string::npos) {
                parts.push_back(trim(line.substr(start)));
                break;
            }
            parts.push_back(trim(line.substr(start, bar - start)));
            start = bar + 1;
        }
        if (parts.size() != 3 || parts[0].empty() || parts[1].empty() || parts[2].empty()) {
            throw_error(Errc::persona_parse_error, "malformed persona line: " + line);
        }
        personas.push_back(Persona{parts[0], parts[1], parts[2]});
    }
    return personas;
}

void dedup_persona_names(std::vector<Persona>& personas) {
    std::unordered_map<std::string, int> counts;
    for (auto& persona : personas) {
        int n = ++counts[persona.name];
        if (n > 1) persona.name += "-" + std::to_string(n);
    }
}

std::string render_sources(const std::vector<providers::SearchHit>& hits) {
    std::ostringstream out;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        out << '[' << (i + 1) << "] " << hits[i].title << " — "
            << truncated(hits[i].snippet, kSnippetCap) << " (" << hits[i].url << ")\n";
    }
    return out.str();
}

}  // namespace

void validate_budget(const ExplorationBudget& budget) {
    if (budget.max_rounds_per_section < 1 || budget.max_queries_per_turn < 1 || budget.search_k < 1) {
        throw_error(Errc::invalid_argument, "exploration budget fields must all be >= 1");
    }
}

std::vector<Persona> generate_personas(const outline::OutlinePlan& plan, int n,
                                       const providers::ProviderHub& hub) {
    if (n < 1) throw_error(Errc::invalid_argument, "persona count must be >= 1");

    std::ostringstream user;
    user << "Sections planned:\n";
    for (const auto& section : plan.sections) user << "- " << section.heading << '\n';
    user << "Number of personas: " << n;

    providers::ChatRequest request;
    request.messages = {{providers::Role::System, kPersonaCasterSystem},
                        {providers::Role::User, user.str()}};
    auto response = hub.default_model->chat(request);

    std::vector<Persona> personas;
    try {
        personas = parse_personas(response.text);
    } catch (const Error&) {
        personas.clear();
    }
    if (static_cast<int>(personas.size()) < n) {
        request.messages.push_back({providers::Role::Assistant, response.text});
        request.messages.push_back({providers::Role::User,
                                    "Reply again with exactly " + std::to_string(n) +
                                        " PERSONA: lines in the required format."});
        response = hub.default_model->chat(request);
        personas = parse_personas(response.text);
        if (static_cast<int>(personas.size()) < n) {
            throw_error(Errc::persona_parse_error,
                        "expected " + std::to_string(n) + " personas, parsed " +
                            std::to_string(personas.size()));
        }
    }
    personas.resize(static_cast<std::size_t>(n));
    dedup_persona_names(personas);
    return personas;
}

namespace {

struct PersonaTurnResult {
    DiscussionTurn turn;
    int searches_attempted = 0;
    int searches_failed = 0;
};

PersonaTurnResult persona_turn(const Persona& persona, const std::string& section_heading,
                               const std::string& question, const std::string& prior_context,
                               const ExplorationBudget& budget, const providers::ProviderHub& hub) {
    PersonaTurnResult result;
    result.turn.section_heading = section_heading;
    result.turn.speaker = {SpeakerKind::Persona, persona.name};

    try {
        std::ostringstream query_user;
        query_user << "Persona: " << persona.name << " — " << persona.role_description << '\n'
                   << "Objective: " << persona.objective << '\n'
                   << "Section: " << section_heading << '\n'
                   << "Question: " << question << '\n'
                   << "Propose at most " << budget.max_queries_per_turn << " queries.";
        providers::ChatRequest query_request;
        query_request.messages = {{providers::Role::System, kQueryPlannerSystem},
                                  {providers::Role::User, query_user.str()}};
        auto query_reply = hub.default_model->chat(query_request);
        auto queries = parse_prefixed_lines(query_reply.text, "QUERY:");
        if (queries.size() > static_cast<std::size_t>(budget.max_queries_per_turn)) {
            queries.resize(static_cast<std::size_t>(budget.max_queries_per_turn));
        }
        result.turn.queries_issued = queries;

        std::unordered_set<std::string> seen_urls;
        for (const auto& query : queries) {
            ++result.searches_attempted;
            try {
                auto hits = hub.web_search->search(
                    {query, budget.search_k, providers::SearchKind::Web});
                for (auto& hit : hits) {
                    if (seen_urls.insert(hit.url).second) {
                        result.turn.hits.push_back(std::move(hit));
                    }
                }
            } catch (const Error&) {
                ++result.searches_failed;  // degrade: answer from prior context
            }
        }

        std::ostringstream answer_user;
        answer_user << "Persona: " << persona.name << " — " << persona.role_description << '\n'
                    << "Objective: " << persona.objective << '\n'
                    << "Section: " << section_heading << '\n'
                    << "Question: " << question << '\n';
        if (!prior_context.empty()) {
            answer_user << "Discussion so far:\n" << prior_context << '\n';
        }
        if (!result.turn.hits.empty()) {
            answer_user << "Sources:\n" << render_sources(result.turn.hits);
        }
        providers::ChatRequest answer_request;
        answer_request.messages = {{providers::Role::System, kPersonaAnswerSystem},
                                   {providers::Role::User, answer_user.str()}};
        result.turn.utterance = hub.default_model->chat(answer_request).text;
    } catch (const Error& e) {
        // Recorded in the turn; the round carries on with the other personas.
        result.turn.utterance = std::string("[persona unavailable: ") + e.what() + "]";
        result.turn.hits.clear();
    }
    return result;
}

}  // namespace

std::vector<DiscussionTurn> run_discussion(const outline::OutlinePlan& plan,
                                           const std::vector<Persona>& personas,
                                           const ExplorationBudget& budget,
                                           const providers::ProviderHub& hub,
                                           reflection::Engine& reflector) {
    if (personas.empty()) throw_error(Errc::invalid_argument, "discussion needs at least one persona");
    validate_budget(budget);

    std::vector<DiscussionTurn> turns;
    const auto parent_scope = providers::LogScope::current();

    for (std::size_t section_idx = 0; section_idx < plan.sections.size(); ++section_idx) {
        const auto& section = plan.sections[section_idx];
        std::string revise_hints;

        for (int round = 0; round < budget.max_rounds_per_section; ++round) {
            // Asker turn.
            std::ostringstream asker_user;
            asker_user << "Section: " << section.heading << '\n';
            for (const auto& question : section.guiding_questions) {
                asker_user << "Guiding question: " << question << '\n';
            }
            if (!revise_hints.empty()) {
                asker_user << "Reviewer suggestions to address:\n" << revise_hints;
            }
            providers::ChatRequest asker_request;
            asker_request.messages = {{providers::Role::System, kAskerSystem},
                                      {providers::Role::User, asker_user.str()}};
            auto asker_reply = hub.default_model->chat(asker_request);
            auto questions = parse_prefixed_lines(asker_reply.text, "QUESTION:");
            std::string question = questions.empty() ? trim(asker_reply.text) : questions.front();
            turns.push_back(DiscussionTurn{section.heading, {SpeakerKind::Asker, ""}, question, {}, {}});

            // Prior context: the answers from the previous round of this section.
            std::ostringstream prior;
            for (const auto& turn : turns) {
                if (turn.section_heading == section.heading &&
                    turn.speaker.kind == SpeakerKind::Persona) {
                    prior << turn.speaker.name << ": " << truncated(turn.utterance, 400) << '\n';
                }
            }
            std::string prior_context = prior.str();

            // Personas search and answer concurrently; turns are appended in
            // fixed round-robin order regardless of completion order.
            std::vector<std::future<PersonaTurnResult>> futures;
            for (std::size_t p = 0; p < personas.size(); ++p) {
                int task_ord = static_cast<int>(
                    (section_idx * static_cast<std::size_t>(budget.max_rounds_per_section) +
                     static_cast<std::size_t>(round)) * personas.size() + p) + 1;
                futures.push_back(std::async(std::launch::async, [&, p, task_ord] {
                    providers::LogScope scope(parent_scope.stage, parent_scope.stage_ord, task_ord);
                    return persona_turn(personas[p], section.heading, question, prior_context,
                                        budget, hub);
                }));
            }
            int attempted = 0, failed = 0;
            for (auto& future : futures) {
                auto result = future.get();
                attempted += result.searches_attempted;
                failed += result.searches_failed;
                turns.push_back(std::move(result.turn));
            }
            if (attempted > 0 && failed == attempted) {
                throw_error(Errc::exploration_dead_end,
                            "every search failed in a round of section '" + section.heading + "'");
            }

            // Writer-viewpoint reflection closes the round.
            std::ostringstream excerpt;
            excerpt << "Question: " << question << '\n';
            for (auto it = turns.end() - static_cast<std::ptrdiff_t>(personas.size());
                 it != turns.end(); ++it) {
                excerpt << it->speaker.name << ": " << truncated(it->utterance, kSnippetCap) << '\n';
            }
            auto request = reflection::ReflectionRequest::make(
                reflection::Viewpoint::Writer,
                {reflection::PayloadKind::TranscriptExcerpt, excerpt.str(), {}},
                {reflection::Criterion::Reliability, reflection::Criterion::Engagement,
                 reflection::Criterion::Consistency, reflection::Criterion::Informativeness},
                "Section under exploration: " + section.heading);
            auto feedback = reflector.reflect(request);
            turns.push_back(DiscussionTurn{section.heading,
                                           {SpeakerKind::Reflection, ""},
                                           reflection::feedback_to_markup(feedback),
                                           {},
                                           {}});
            if (feedback.verdict == reflection::Verdict::Accept) break;

            revise_hints.clear();
            for (const auto& suggestion : feedback.suggestions) {
                revise_hints += "- " + suggestion + '\n';
            }
        }
    }
    return turns;
}

EvidenceBank collect_evidence(const std::vector<DiscussionTurn>& turns,
                              const std::string& retrieved_at) {
    EvidenceBank bank;
    std::unordered_map<std::string, std::size_t> index_by_url;
    for (const auto& turn : turns) {
        for (const auto& hit : turn.hits) {
            auto it = index_by_url.find(hit.url);
            if (it == index_by_url.end()) {
                Evidence evidence;
                evidence.citation = core::Citation{hit.url, hit.title, hit.snippet, retrieved_at};
                evidence.content = truncated(hit.snippet, kSnippetCap);
                evidence.supporting_queries = turn.queries_issued;
                evidence.section_headings.insert(turn.section_heading);
                index_by_url.emplace(hit.url, bank.items.size());
                bank.items.push_back(std::move(evidence));
            } else {
                auto& evidence = bank.items[it->second];
                evidence.section_headings.insert(turn.section_heading);
                for (const auto& query : turn.queries_issued) {
                    if (std::find(evidence.supporting_queries.begin(),
                                  evidence.supporting_queries.end(),
                                  query) == evidence.supporting_queries.end()) {
                        evidence.supporting_queries.push_back(query);
                    }
                }
            }
        }
    }
    return bank;
}

void to_json(nlohmann::json& j, const Persona& v) {
    j = nlohmann::json{{"name", v.name},
                       {"role_description", v.role_description},
                       {"objective", v.objective}};
}

void from_json(const nlohmann::json& j, Persona& v) {
    j.at("name").get_to(v.name);
    j.at("role_description").get_to(v.role_description);
    j.at("objective").get_to(v.objective);
}

void to_json(nlohmann::json& j, const DiscussionTurn& v) {
    nlohmann::json speaker;
    switch (v.speaker.kind) {
        case SpeakerKind::Asker: speaker = {{"kind", "asker"}}; break;
        case SpeakerKind::Reflection: speaker = {{"kind", "reflection"}}; break;
        case SpeakerKind::Persona:
            speaker = {{"kind", "persona"}, {"name", v.speaker.name}};
            break;
    }
    j = nlohmann::json{{"section_heading", v.section_heading},
                       {"speaker", speaker},
                       {"utterance", v.utterance},
                       {"queries_issued", v.queries_issued},
                       {"hits", v.hits}};
}

void from_json(const nlohmann::json& j, DiscussionTurn& v) {
    v = DiscussionTurn{};
    j.at("section_heading").get_to(v.section_heading);
    auto kind = j.at("speaker").at("kind").get<std::string>();
    if (kind == "asker") {
        v.speaker = {SpeakerKind::Asker, ""};
    } else if (kind == "reflection") {
        v.speaker = {SpeakerKind::Reflection, ""};
    } else {
        v.speaker = {SpeakerKind::Persona, j.at("speaker").at("name").get<std::string>()};
    }
    j.at("utterance").get_to(v.utterance);
    j.at("queries_issued").get_to(v.queries_issued);
    j.at("hits").get_to(v.hits);
}

void to_json(nlohmann::json& j, const Evidence& v) {
    j = nlohmann::json{{"citation", v.citation},
                       {"content", v.content},
                       {"supporting_queries", v.supporting_queries},
                       {"section_headings", v.section_headings}};
}

void from_json(const nlohmann::json& j, Evidence& v) {
    j.at("citation").get_to(v.citation);
    j.at("content").get_to(v.content);
    j.at("supporting_queries").get_to(v.supporting_queries);
    j.at("section_headings").get_to(v.section_headings);
}

void to_json(nlohmann::json& j, const EvidenceBank& v) {
    j = nlohmann::json{{"items", v.items}};
}

void from_json(const nlohmann::json& j, EvidenceBank& v) {
    j.at("items").get_to(v.items);
}

}  // namespace scribe::exploration
