#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <deque>
#include <random>

#include "scribe/errors.hpp"
#include "scribe/exploration/exploration.hpp"

using namespace scribe;
using namespace scribe::exploration;

namespace {

struct Script {
    // queue of reflection verdicts; true = accept
    std::deque<bool> verdicts;
    // searches that should fail (by query substring); empty = all succeed
    std::vector<std::string> failing_queries;
    bool fail_all_searches = false;
    std::atomic<int> search_calls{0};
    std::vector<nlohmann::json> chat_requests;  // captured for prompt assembly checks
    std::mutex mutex;
};

providers::ProviderHub script_hub(std::shared_ptr<Script> script) {
    auto chat = std::make_shared<providers::FunctionTransport>(
        [script](const std::string&, const nlohmann::json& request) -> nlohmann::json {
            {
                std::lock_guard lock(script->mutex);
                script->chat_requests.push_back(request);
            }
            auto system = request.at("messages").at(0).at("content").get<std::string>();
            std::string user;
            for (const auto& message : request.at("messages")) {
                if (message.at("role") == "user") user = message.at("content").get<std::string>();
            }
            std::string text;
            if (system.find("asker leading") != std::string::npos) {
                text = "QUESTION: what matters here?\n";
            } else if (system.find("search strategist") != std::string::npos) {
                // persona name keeps queries distinct between personas
                auto pos = user.find("Persona: ");
                auto name = user.substr(pos + 9, user.find(' ', pos + 9) - pos - 9);
                text = "QUERY: facts " + name + "\nQUERY: background " + name + "\nQUERY: extra " +
                       name + "\nQUERY: overflow " + name + "\n";
            } else if (system.find("answering as the persona") != std::string::npos) {
                text = "Grounded answer.";
            } else if (system.find("research panel") != std::string::npos) {
                text = "PERSONA: A | role a | obj a\nPERSONA: B | role b | obj b\nPERSONA: C | "
                       "role c | obj c\n";
            } else {  // reflection judge
                bool accept = true;
                if (!script->verdicts.empty()) {
                    accept = script->verdicts.front();
                    script->verdicts.pop_front();
                }
                text = accept ? "VERDICT: accept\n"
                              : "SUGGESTION: dig deeper\nVERDICT: revise\n";
            }
            return nlohmann::json{{"text", text},
                                  {"usage", {{"prompt_tokens", 0}, {"completion_tokens", 0}}}};
        });
    auto search = std::make_shared<providers::FunctionTransport>(
        [script](const std::string&, const nlohmann::json& request) -> nlohmann::json {
            ++script->search_calls;
            auto query = request.at("query").get<std::string>();
            if (script->fail_all_searches) {
                throw_error(Errc::transport_error, "search backend down");
            }
            for (const auto& needle : script->failing_queries) {
                if (query.find(needle) != std::string::npos) {
                    throw_error(Errc::transport_error, "scripted failure");
                }
            }
            nlohmann::json hits = nlohmann::json::array();
            for (int i = 0; i < 2; ++i) {
                hits.push_back({{"url", "https://hit.example/" + query + "/" + std::to_string(i)},
                                {"title", "Title " + query},
                                {"snippet", "snippet-" + query + "-" + std::to_string(i)}});
            }
            return nlohmann::json{{"hits", hits}};
        });

    providers::ProviderHub hub;
    hub.default_model = std::make_shared<providers::ChatClient>("default_model", chat, nullptr, "m");
    hub.reflection_model =
        std::make_shared<providers::ChatClient>("reflection_model", chat, nullptr, "judge");
    hub.web_search = std::make_shared<providers::SearchClient>(
        "web_search", providers::SearchKind::Web, search, nullptr);
    return hub;
}

outline::OutlinePlan plan_with(const std::vector<std::string>& headings) {
    outline::OutlinePlan plan;
    plan.topic_id = "t";
    for (const auto& heading : headings) plan.sections.push_back({heading, {}, 1});
    return plan;
}

std::vector<Persona> personas_n(int n) {
    std::vector<Persona> personas;
    for (int i = 0; i < n; ++i) {
        personas.push_back({"P" + std::to_string(i + 1), "role", "objective"});
    }
    return personas;
}

}  // namespace

TEST_CASE("generate_personas: exact count, parse contract, dedup rule") {
    auto script = std::make_shared<Script>();
    auto hub = script_hub(script);

    auto one = generate_personas(plan_with({"S"}), 1, hub);
    REQUIRE(one.size() == 1);
    CHECK(one[0].name == "A");

    auto three = generate_personas(plan_with({"S"}), 3, hub);
    REQUIRE(three.size() == 3);
    CHECK(three[2].name == "C");

    // duplicate names get suffixed
    auto dup_chat = std::make_shared<providers::FunctionTransport>(
        [](const std::string&, const nlohmann::json&) {
            return nlohmann::json{
                {"text", "PERSONA: Expert | r1 | o1\nPERSONA: Expert | r2 | o2\n"},
                {"usage", {{"prompt_tokens", 0}, {"completion_tokens", 0}}}};
        });
    providers::ProviderHub dup_hub;
    dup_hub.default_model =
        std::make_shared<providers::ChatClient>("default_model", dup_chat, nullptr, "m");
    auto two = generate_personas(plan_with({"S"}), 2, dup_hub);
    REQUIRE(two.size() == 2);
    CHECK(two[0].name == "Expert");
    CHECK(two[1].name == "Expert-2");
}

TEST_CASE("generate_personas re-prompts once, then PersonaParseError") {
    int call = 0;
    auto flaky = std::make_shared<providers::FunctionTransport>(
        [&call](const std::string&, const nlohmann::json&) {
            ++call;
            std::string text = call == 1 ? "no personas here" : "PERSONA: Solo | r | o\n";
            return nlohmann::json{{"text", text},
                                  {"usage", {{"prompt_tokens", 0}, {"completion_tokens", 0}}}};
        });
    providers::ProviderHub hub;
    hub.default_model = std::make_shared<providers::ChatClient>("default_model", flaky, nullptr, "m");
    CHECK(generate_personas(plan_with({"S"}), 1, hub).size() == 1);

    auto hopeless = std::make_shared<providers::FunctionTransport>(
        [](const std::string&, const nlohmann::json&) {
            return nlohmann::json{{"text", "never a persona"},
                                  {"usage", {{"prompt_tokens", 0}, {"completion_tokens", 0}}}};
        });
    hub.default_model =
        std::make_shared<providers::ChatClient>("default_model", hopeless, nullptr, "m");
    try {
        generate_personas(plan_with({"S"}), 2, hub);
        FAIL("expected PersonaParseError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::persona_parse_error);
    }
}

TEST_CASE("run_discussion: minimal trace is ask, answer, reflect") {
    auto script = std::make_shared<Script>();
    auto hub = script_hub(script);
    reflection::Engine engine(hub.reflection_model);

    auto turns = run_discussion(plan_with({"Only"}), personas_n(1), {2, 3, 5}, hub, engine);
    REQUIRE(turns.size() == 3);
    CHECK(turns[0].speaker.kind == SpeakerKind::Asker);
    CHECK(turns[1].speaker.kind == SpeakerKind::Persona);
    CHECK(turns[1].speaker.name == "P1");
    CHECK(!turns[1].hits.empty());
    CHECK(turns[2].speaker.kind == SpeakerKind::Reflection);
}

TEST_CASE("run_discussion stops at the round budget when reflection keeps revising") {
    auto script = std::make_shared<Script>();
    script->verdicts = {false, false, false, false};
    auto hub = script_hub(script);
    reflection::Engine engine(hub.reflection_model);

    auto turns = run_discussion(plan_with({"Only"}), personas_n(1), {2, 1, 5}, hub, engine);
    // two rounds of (ask + 1 persona + reflect)
    CHECK(turns.size() == 6);
}

TEST_CASE("run_discussion schedule: section-major, asker first, personas in order") {
    auto script = std::make_shared<Script>();
    auto hub = script_hub(script);
    reflection::Engine engine(hub.reflection_model);

    auto turns = run_discussion(plan_with({"S1", "S2"}), personas_n(2), {2, 1, 5}, hub, engine);
    // Hand-enumerated schedule with accept each round:
    // S1: ask, P1, P2, reflect; S2: ask, P1, P2, reflect.
    REQUIRE(turns.size() == 8);
    const char* expected_sections[] = {"S1", "S1", "S1", "S1", "S2", "S2", "S2", "S2"};
    SpeakerKind expected_kinds[] = {SpeakerKind::Asker,   SpeakerKind::Persona,
                                    SpeakerKind::Persona, SpeakerKind::Reflection,
                                    SpeakerKind::Asker,   SpeakerKind::Persona,
                                    SpeakerKind::Persona, SpeakerKind::Reflection};
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(turns[i].section_heading == expected_sections[i]);
        CHECK(turns[i].speaker.kind == expected_kinds[i]);
    }
    CHECK(turns[1].speaker.name == "P1");
    CHECK(turns[2].speaker.name == "P2");
}

TEST_CASE("turn count is bounded by sections x rounds x (1 + personas + 1)") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 12; ++trial) {
        auto script = std::make_shared<Script>();
        for (int i = 0; i < 32; ++i) script->verdicts.push_back(rng() % 2 == 0);
        auto hub = script_hub(script);
        reflection::Engine engine(hub.reflection_model);

        int sections = 1 + static_cast<int>(rng() % 3);
        int persona_count = 1 + static_cast<int>(rng() % 3);
        ExplorationBudget budget{1 + static_cast<int>(rng() % 3), 2, 4};
        std::vector<std::string> headings;
        for (int s = 0; s < sections; ++s) headings.push_back("S" + std::to_string(s));

        auto turns =
            run_discussion(plan_with(headings), personas_n(persona_count), budget, hub, engine);
        CHECK(turns.size() <= static_cast<std::size_t>(sections * budget.max_rounds_per_section *
                                                       (1 + persona_count + 1)));
    }
}

TEST_CASE("queries per turn are capped and searches run with the budget's k") {
    auto script = std::make_shared<Script>();
    auto hub = script_hub(script);
    reflection::Engine engine(hub.reflection_model);

    auto turns = run_discussion(plan_with({"S"}), personas_n(1), {1, 2, 5}, hub, engine);
    REQUIRE(turns.size() == 3);
    CHECK(turns[1].queries_issued.size() == 2);  // script offers 4, budget caps at 2
    CHECK(script->search_calls == 2);
}

TEST_CASE("persona answer prompts carry at least one of the turn's hit snippets") {
    auto script = std::make_shared<Script>();
    auto hub = script_hub(script);
    reflection::Engine engine(hub.reflection_model);

    auto turns = run_discussion(plan_with({"S1"}), personas_n(2), {1, 1, 5}, hub, engine);
    for (const auto& turn : turns) {
        if (turn.speaker.kind != SpeakerKind::Persona || turn.hits.empty()) continue;
        bool found = false;
        std::lock_guard lock(script->mutex);
        for (const auto& request : script->chat_requests) {
            auto system = request.at("messages").at(0).at("content").get<std::string>();
            if (system.find("answering as the persona") == std::string::npos) continue;
            std::string user;
            for (const auto& message : request.at("messages")) {
                if (message.at("role") == "user") user = message.at("content").get<std::string>();
            }
            if (user.find(turn.speaker.name) == std::string::npos) continue;
            for (const auto& hit : turn.hits) {
                if (user.find(hit.snippet) != std::string::npos) found = true;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("failed searches degrade the turn; a fully failed round aborts") {
    auto partial = std::make_shared<Script>();
    partial->failing_queries = {"P1"};  // persona P1's searches all fail
    auto hub = script_hub(partial);
    reflection::Engine engine(hub.reflection_model);
    auto turns = run_discussion(plan_with({"S"}), personas_n(2), {1, 1, 5}, hub, engine);
    REQUIRE(turns.size() == 4);
    CHECK(turns[1].hits.empty());        // degraded but answered
    CHECK(!turns[1].utterance.empty());
    CHECK(!turns[2].hits.empty());

    auto dead = std::make_shared<Script>();
    dead->fail_all_searches = true;
    auto dead_hub = script_hub(dead);
    reflection::Engine dead_engine(dead_hub.reflection_model);
    try {
        run_discussion(plan_with({"S"}), personas_n(2), {1, 1, 5}, dead_hub, dead_engine);
        FAIL("expected ExplorationDeadEnd");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::exploration_dead_end);
    }
}

namespace {

DiscussionTurn turn_with_hits(const std::string& section,
                              const std::vector<std::string>& urls,
                              const std::vector<std::string>& queries = {"q"}) {
    DiscussionTurn turn;
    turn.section_heading = section;
    turn.speaker = {SpeakerKind::Persona, "P"};
    turn.queries_issued = queries;
    for (const auto& url : urls) {
        turn.hits.push_back({url, "title:" + url, "snippet:" + url, {}});
    }
    return turn;
}

}  // namespace

TEST_CASE("collect_evidence: dedup, order, merge") {
    const std::string stamp = "2025-01-01T00:00:00Z";

    auto bank = collect_evidence({turn_with_hits("A", {"u1", "u2", "u1"})}, stamp);
    REQUIRE(bank.items.size() == 2);
    CHECK(bank.items[0].citation.url == "u1");
    CHECK(bank.items[1].citation.url == "u2");
    CHECK(bank.items[0].citation.retrieved_at == stamp);

    CHECK(collect_evidence({}, stamp).items.empty());

    // Hand-merged 5-hit fixture: u1 appears under sections A and B.
    std::vector<DiscussionTurn> trace{
        turn_with_hits("A", {"u1", "u2"}, {"qa"}),
        turn_with_hits("B", {"u1", "u3"}, {"qb"}),
        turn_with_hits("B", {"u4"}, {"qc"}),
    };
    auto merged = collect_evidence(trace, stamp);
    REQUIRE(merged.items.size() == 4);
    CHECK(merged.items[0].citation.url == "u1");
    CHECK(merged.items[0].section_headings == std::set<std::string>{"A", "B"});
    CHECK(merged.items[0].supporting_queries == std::vector<std::string>{"qa", "qb"});
    CHECK(merged.items[3].citation.url == "u4");
}

TEST_CASE("collect_evidence is idempotent and keeps urls unique on random traces") {
    std::mt19937 rng(99);
    const std::string stamp = "2025-01-01T00:00:00Z";
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<DiscussionTurn> turns;
        std::size_t turn_count = rng() % 6;
        for (std::size_t t = 0; t < turn_count; ++t) {
            std::vector<std::string> urls;
            std::size_t hit_count = rng() % 5;
            for (std::size_t h = 0; h < hit_count; ++h) {
                urls.push_back("u" + std::to_string(rng() % 6));
            }
            turns.push_back(turn_with_hits("S" + std::to_string(rng() % 3), urls));
        }
        auto first = collect_evidence(turns, stamp);
        auto second = collect_evidence(turns, stamp);

        REQUIRE(first.items.size() == second.items.size());
        std::set<std::string> seen;
        for (std::size_t i = 0; i < first.items.size(); ++i) {
            CHECK(first.items[i].citation.url == second.items[i].citation.url);
            CHECK(first.items[i].section_headings == second.items[i].section_headings);
            CHECK(seen.insert(first.items[i].citation.url).second);  // unique urls
        }
    }
}

TEST_CASE("discussion turns round-trip through canonical JSON") {
    auto turn = turn_with_hits("S", {"u1"});
    nlohmann::json j = turn;
    CHECK(j.at("speaker").at("kind") == "persona");
    auto back = j.get<DiscussionTurn>();
    CHECK(back.section_heading == turn.section_heading);
    CHECK(back.speaker.name == "P");
    CHECK(back.hits.size() == 1);
}
