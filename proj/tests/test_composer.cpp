#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>
#include <random>

#include "scribe/composer/composer.hpp"
#include "scribe/errors.hpp"

using namespace scribe;
using namespace scribe::composer;

namespace {

std::shared_ptr<std::deque<std::string>> g_unused;

providers::ProviderHub queue_hub(std::shared_ptr<std::deque<std::string>> queue) {
    auto transport = std::make_shared<providers::FunctionTransport>(
        [queue](const std::string&, const nlohmann::json&) -> nlohmann::json {
            if (queue->empty()) throw_error(Errc::transport_error, "no scripted reply left");
            auto text = queue->front();
            queue->pop_front();
            return nlohmann::json{{"text", text},
                                  {"usage", {{"prompt_tokens", 0}, {"completion_tokens", 0}}}};
        });
    providers::ProviderHub hub;
    hub.default_model =
        std::make_shared<providers::ChatClient>("default_model", transport, nullptr, "m");
    hub.reflection_model =
        std::make_shared<providers::ChatClient>("reflection_model", transport, nullptr, "judge");
    return hub;
}

exploration::EvidenceBank bank_of(std::size_t n, const std::string& tagged_section = "History") {
    exploration::EvidenceBank bank;
    for (std::size_t i = 0; i < n; ++i) {
        exploration::Evidence evidence;
        evidence.citation = {"https://e" + std::to_string(i) + ".example",
                             "Source " + std::to_string(i), "content " + std::to_string(i),
                             "2025-01-01T00:00:00Z"};
        evidence.content = "content " + std::to_string(i);
        // tag even indices for the section, odd ones elsewhere
        evidence.section_headings.insert(i % 2 == 0 ? tagged_section : "Elsewhere");
        bank.items.push_back(evidence);
    }
    return bank;
}

outline::OutlineSection history_section() { return {"History", {"when?"}, 1}; }

SectionNotes notes_over(const std::vector<std::vector<std::size_t>>& bullet_indices,
                        const std::string& heading = "History") {
    SectionNotes notes;
    notes.section_heading = heading;
    for (std::size_t b = 0; b < bullet_indices.size(); ++b) {
        notes.bullets.push_back({"claim " + std::to_string(b), bullet_indices[b]});
    }
    return notes;
}

reflection::ReflectionFeedback revise_feedback(const std::string& suggestion) {
    reflection::ReflectionFeedback feedback;
    feedback.viewpoint = reflection::Viewpoint::Writer;
    feedback.verdict = reflection::Verdict::Revise;
    feedback.suggestions = {suggestion};
    return feedback;
}

}  // namespace

TEST_CASE("summarize_evidence scopes to the section's bank entries") {
    auto queue = std::make_shared<std::deque<std::string>>();
    auto hub = queue_hub(queue);
    auto bank = bank_of(4);  // indices 0,2 tagged History

    queue->assign({"BULLET: first point [1]\nBULLET: second point [2]\n"});
    auto notes = summarize_evidence(bank, history_section(), hub);
    REQUIRE(notes.bullets.size() == 2);
    // labels [1],[2] map onto the scoped bank indices {0,2}
    CHECK(notes.bullets[0].evidence_indices == std::vector<std::size_t>{0});
    CHECK(notes.bullets[1].evidence_indices == std::vector<std::size_t>{2});
}

TEST_CASE("summarize_evidence: empty bank short-circuits; bad labels fail after a re-prompt") {
    auto queue = std::make_shared<std::deque<std::string>>();
    auto hub = queue_hub(queue);

    auto empty = summarize_evidence({}, history_section(), hub);
    CHECK(empty.bullets.empty());
    CHECK(queue->empty());  // no model call for an empty bank

    auto bank = bank_of(3, "History");
    // only indices 0 and 2 are tagged History -> 2 labels; [7] is out of range
    queue->assign({"BULLET: wild claim [7]\n", "BULLET: tame claim [7]\n"});
    try {
        summarize_evidence(bank, history_section(), hub);
        FAIL("expected NotesParseError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::notes_parse_error);
    }

    // bullets with no label at all are also malformed
    queue->assign({"BULLET: uncited claim\n", "BULLET: cited claim [1]\n"});
    CHECK(summarize_evidence(bank, history_section(), hub).bullets.size() == 1);
}

TEST_CASE("summarize_evidence falls back to the whole bank when nothing matches the section") {
    auto queue = std::make_shared<std::deque<std::string>>();
    auto hub = queue_hub(queue);
    auto bank = bank_of(2, "Unrelated");
    bank.items[0].section_headings = {"Unrelated"};
    bank.items[1].section_headings = {"Unrelated"};
    queue->assign({"BULLET: from anywhere [2]\n"});
    auto notes = summarize_evidence(bank, history_section(), hub);
    REQUIRE(notes.bullets.size() == 1);
    CHECK(notes.bullets[0].evidence_indices == std::vector<std::size_t>{1});
}

TEST_CASE("draft_section: marker labels map through the notes' evidence universe") {
    auto queue = std::make_shared<std::deque<std::string>>();
    auto hub = queue_hub(queue);
    // universe = [1, 2]: label [1] is bank index 1
    auto notes = notes_over({{1}, {2}});

    queue->assign({"One paragraph citing [1].\n"});
    auto section = draft_section(history_section(), notes, "", hub);
    REQUIRE(section.paragraphs.size() == 1);
    CHECK(section.paragraphs[0].citation_indices == std::vector<std::size_t>{1});
    CHECK(section.heading == "History");
    CHECK(section.paragraphs[0].text == "One paragraph citing.");  // marker stripped

    queue->assign({"First paragraph [1].\n\nSecond paragraph [2] [1].\n"});
    auto two = draft_section(history_section(), notes, "", hub);
    REQUIRE(two.paragraphs.size() == 2);
    CHECK(two.paragraphs[1].citation_indices == std::vector<std::size_t>{2, 1});
}

TEST_CASE("draft_section: no markers is allowed, [0] and out-of-range are not") {
    auto queue = std::make_shared<std::deque<std::string>>();
    auto hub = queue_hub(queue);
    auto notes = notes_over({{0}});

    queue->assign({"A paragraph with no citations at all.\n"});
    auto uncited = draft_section(history_section(), notes, "", hub);
    CHECK(uncited.paragraphs[0].citation_indices.empty());

    queue->assign({"Zero marker [0].\n", "Still zero [0].\n"});
    try {
        draft_section(history_section(), notes, "", hub);
        FAIL("expected DraftParseError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::draft_parse_error);
    }

    queue->assign({"Too big [5].\n", "Too big again [5].\n"});
    CHECK_THROWS_AS(draft_section(history_section(), notes, "", hub), Error);

    auto mismatched = notes_over({{0}}, "Other");
    queue->assign({"irrelevant"});
    try {
        draft_section(history_section(), mismatched, "", hub);
        FAIL("expected InvalidArgument");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_argument);
    }
}

TEST_CASE("refine_section rewrites under a revise verdict and keeps the citation universe") {
    auto queue = std::make_shared<std::deque<std::string>>();
    auto hub = queue_hub(queue);
    auto notes = notes_over({{0}, {3}});
    core::Section input{"History", {{"Original text.", {0}}}};

    queue->assign({"Rewritten with a transition [1] and more [2].\n"});
    auto output = refine_section(input, notes, revise_feedback("add transition"), "", hub);
    CHECK(output.heading == "History");
    CHECK(output.paragraphs[0].text != input.paragraphs[0].text);
    // output citations stay inside the universe {0,3}
    for (const auto& paragraph : output.paragraphs) {
        for (std::size_t index : paragraph.citation_indices) {
            CHECK((index == 0 || index == 3));
        }
    }

    reflection::ReflectionFeedback accept;
    accept.verdict = reflection::Verdict::Accept;
    try {
        refine_section(input, notes, accept, "", hub);
        FAIL("expected InvalidArgument");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_argument);
    }
}

TEST_CASE("assemble_article: compaction, remap, and dangling citations") {
    auto bank = bank_of(3);
    // two sections citing bank items {2, 0, 2}
    std::vector<core::Section> sections{
        {"S1", {{"first", {2}}}},
        {"S2", {{"second", {0}}, {"third", {2}}}},
    };
    auto article = assemble_article("t", sections, bank);
    REQUIRE(article.references.size() == 2);
    CHECK(article.references[0].url == bank.items[2].citation.url);  // first-cited first
    CHECK(article.references[1].url == bank.items[0].citation.url);
    CHECK(article.sections[0].paragraphs[0].citation_indices == std::vector<std::size_t>{0});
    CHECK(article.sections[1].paragraphs[0].citation_indices == std::vector<std::size_t>{1});
    CHECK(article.sections[1].paragraphs[1].citation_indices == std::vector<std::size_t>{0});

    auto none = assemble_article("t", {{"S", {{"plain", {}}}}}, bank);
    CHECK(none.references.empty());

    try {
        assemble_article("t", {{"S", {{"bad", {9}}}}}, bank);
        FAIL("expected DanglingCitation");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::dangling_citation);
    }

    CHECK_THROWS_AS(assemble_article("t", {}, bank), Error);
}

TEST_CASE("assemble_article satisfies the article invariants on random inputs") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 80; ++trial) {
        auto bank = bank_of(1 + rng() % 6);
        std::vector<core::Section> sections;
        std::size_t section_count = 1 + rng() % 3;
        std::vector<std::size_t> first_seen;  // order of first citation
        for (std::size_t s = 0; s < section_count; ++s) {
            core::Section section{"S" + std::to_string(s), {}};
            std::size_t paragraph_count = 1 + rng() % 3;
            for (std::size_t p = 0; p < paragraph_count; ++p) {
                core::Paragraph paragraph;
                paragraph.text = "p";
                std::size_t citation_count = rng() % 3;
                for (std::size_t c = 0; c < citation_count; ++c) {
                    std::size_t index = rng() % bank.items.size();
                    paragraph.citation_indices.push_back(index);
                    if (std::find(first_seen.begin(), first_seen.end(), index) ==
                        first_seen.end()) {
                        first_seen.push_back(index);
                    }
                }
                section.paragraphs.push_back(paragraph);
            }
            sections.push_back(section);
        }
        auto article = assemble_article("t", sections, bank);
        CHECK(core::article_invariants_hold(article));
        // compaction order equals first-citation order
        REQUIRE(article.references.size() == first_seen.size());
        for (std::size_t i = 0; i < first_seen.size(); ++i) {
            CHECK(article.references[i].url == bank.items[first_seen[i]].citation.url);
        }
    }
}

TEST_CASE("compose_article drives the writer refine loop within its call budget") {
    auto queue = std::make_shared<std::deque<std::string>>();
    auto hub = queue_hub(queue);
    auto feedback_log = std::make_shared<reflection::FeedbackLog>();
    reflection::Engine engine(hub.reflection_model, feedback_log);

    outline::OutlinePlan plan;
    plan.topic_id = "t";
    plan.sections = {{"History", {}, 1}};
    auto bank = bank_of(2, "History");  // indices 0 tagged History, 1 Elsewhere

    queue->assign({
        "BULLET: a documented point [1]\n",            // summarize
        "Draft paragraph [1].\n",                       // draft
        "SUGGESTION: smooth the flow\nVERDICT: revise\n",  // reflect 1
        "Revised paragraph [1].\n",                     // refine
        "VERDICT: accept\n",                            // reflect 2
    });
    ComposeOptions options;
    options.max_reflect_iters = 3;
    auto article = compose_article("t", plan, bank, hub, engine, options);
    CHECK(queue->empty());
    REQUIRE(article.sections.size() == 1);
    CHECK(article.sections[0].paragraphs[0].text == "Revised paragraph.");
    CHECK(article.references.size() == 1);
    CHECK(feedback_log->size() == 2);
    CHECK(core::article_invariants_hold(article));
}
