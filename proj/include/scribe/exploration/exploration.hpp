#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scribe/core/types.hpp"
#include "scribe/outline/outline.hpp"
#include "scribe/providers/clients.hpp"
#include "scribe/reflection/reflection.hpp"

namespace scribe::exploration {

struct Persona {
    std::string name;
    std::string role_description;
    std::string objective;

    bool operator==(const Persona&) const = default;
};

enum class SpeakerKind { Asker, Persona, Reflection };

struct Speaker {
    SpeakerKind kind = SpeakerKind::Asker;
    std::string name;  // persona turns only

    bool operator==(const Speaker&) const = default;
};

struct DiscussionTurn {
    std::string section_heading;
    Speaker speaker;
    std::string utterance;
    std::vector<std::string> queries_issued;
    std::vector<providers::SearchHit> hits;  // always empty on asker turns
};

struct Evidence {
    core::Citation citation;
    std::string content;
    std::vector<std::string> supporting_queries;
    std::set<std::string> section_headings;
};

struct EvidenceBank {
    std::vector<Evidence> items;
};

struct ExplorationBudget {
    int max_rounds_per_section = 2;
    int max_queries_per_turn = 3;
    int search_k = 5;
};

void validate_budget(const ExplorationBudget& budget);

// Exactly n personas parsed from a PERSONA: name | role | objective listing;
// duplicate names get a numeric suffix. One re-prompt, then PersonaParseError.
std::vector<Persona> generate_personas(const outline::OutlinePlan& plan, int n,
                                       const providers::ProviderHub& hub);

// Walks the outline section-major: the asker poses a question, each persona
// searches (concurrently) and answers grounded in its hits, and a
// writer-viewpoint reflection closes the round. Rounds repeat until the
// reflection accepts or the per-section budget runs out.
//
// Failed searches degrade to answers from prior context; the discussion only
// aborts when every search in a round fails.
std::vector<DiscussionTurn> run_discussion(const outline::OutlinePlan& plan,
                                           const std::vector<Persona>& personas,
                                           const ExplorationBudget& budget,
                                           const providers::ProviderHub& hub,
                                           reflection::Engine& reflector);

// Merges every hit across the turns into a url-unique bank, first-seen order,
// accumulating section headings and supporting queries. Pure and idempotent;
// `retrieved_at` stamps the citations (callers pass the run clock's time).
EvidenceBank collect_evidence(const std::vector<DiscussionTurn>& turns,
                              const std::string& retrieved_at);

void to_json(nlohmann::json& j, const Persona& v);
void from_json(const nlohmann::json& j, Persona& v);
void to_json(nlohmann::json& j, const DiscussionTurn& v);
void from_json(const nlohmann::json& j, DiscussionTurn& v);
void to_json(nlohmann::json& j, const Evidence& v);
void from_json(const nlohmann::json& j, Evidence& v);
void to_json(nlohmann::json& j, const EvidenceBank& v);
void from_json(const nlohmann::json& j, EvidenceBank& v);

}  // namespace scribe::exploration
