#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <deque>
#include <map>
#include <random>

#include "scribe/errors.hpp"
#include "scribe/visual/visual.hpp"

using namespace scribe;
using namespace scribe::visual;

namespace {

core::ArticleDraft two_section_article() {
    core::ArticleDraft article;
    article.topic_id = "t";
    article.references = {{"https://ref1.example/page", "Ref One", "snippet", "2025-01-01T00:00:00Z"},
                          {"https://ref2.example/page", "Ref Two", "snippet", "2025-01-01T00:00:00Z"}};
    article.sections = {{"Alpha", {{"First paragraph.", {0}}, {"Second paragraph.", {1}}}},
                        {"Beta", {{"Third paragraph.", {}}}}};
    return article;
}

// Embedding transport mapping locators/captions to fixed angles so cosines
// against the caption are exact, chosen values.
providers::ProviderHub angle_hub(const std::map<std::string, double>& cosine_of,
                                 std::shared_ptr<std::deque<std::string>> chat_queue = nullptr) {
    auto embed = std::make_shared<providers::FunctionTransport>(
        [cosine_of](const std::string& kind, const nlohmann::json& request) -> nlohmann::json {
            std::string key = kind == "embed_text" ? request.at("text").get<std::string>()
                                                   : request.at("locator").get<std::string>();
            if (key == "fail") throw_error(Errc::fixture_miss, "no embedding fixture");
            double c = 1.0;  // caption embeds at angle 0
            if (auto it = cosine_of.find(key); it != cosine_of.end()) c = it->second;
            double s = std::sqrt(std::max(0.0, 1.0 - c * c));
            return nlohmann::json{{"values", {c, s}}};
        });
    providers::ProviderHub hub;
    hub.embedding = std::make_shared<providers::EmbeddingClient>("embedding", embed, nullptr, 2, "e");
    if (chat_queue) {
        auto chat = std::make_shared<providers::FunctionTransport>(
            [chat_queue](const std::string&, const nlohmann::json&) -> nlohmann::json {
                if (chat_queue->empty()) throw_error(Errc::transport_error, "no reply left");
                auto text = chat_queue->front();
                chat_queue->pop_front();
                return nlohmann::json{{"text", text},
                                      {"usage", {{"prompt_tokens", 0}, {"completion_tokens", 0}}}};
            });
        hub.default_model =
            std::make_shared<providers::ChatClient>("default_model", chat, nullptr, "m");
        hub.multimodal_model =
            std::make_shared<providers::ChatClient>("multimodal_model", chat, nullptr, "mm");
        hub.reflection_model =
            std::make_shared<providers::ChatClient>("reflection_model", chat, nullptr, "judge");
    }
    return hub;
}

ImageCandidate candidate(const std::string& locator, CandidateSource source) {
    ImageCandidate c;
    c.source = source;
    c.hit.url = "https://page.example/" + locator;
    c.hit.title = locator;
    c.hit.snippet = "";
    c.hit.image_locator = locator;
    return c;
}

core::ImagePlacement placement_at(std::size_t s, std::size_t p, const std::string& caption) {
    return {s, p, caption, "because"};
}

}  // namespace

TEST_CASE("placement proposals: parse, bounds, density, cap") {
    auto article = two_section_article();
    auto queue = std::make_shared<std::deque<std::string>>();
    auto hub = angle_hub({}, queue);
    reflection::Engine engine(hub.reflection_model);

    SUBCASE("valid proposal on a 2-section article") {
        queue->assign({
            "PLACEMENT: section=0 paragraph=0 caption=\"map of region\" rationale=\"context\"\n",
            "VERDICT: accept\n",
        });
        auto placements = propose_placements(article, hub, engine);
        REQUIRE(placements.size() == 1);
        CHECK(placements[0].desired_caption == "map of region");
    }

    SUBCASE("out-of-range section is dropped, empty result allowed") {
        queue->assign({
            "PLACEMENT: section=9 paragraph=0 caption=\"ghost\" rationale=\"\"\n",
            "VERDICT: accept\n",
        });
        CHECK(propose_placements(article, hub, engine).empty());
    }

    SUBCASE("second proposal for the same paragraph loses (first wins)") {
        queue->assign({
            "PLACEMENT: section=0 paragraph=1 caption=\"first\" rationale=\"\"\n"
            "PLACEMENT: section=0 paragraph=1 caption=\"second\" rationale=\"\"\n",
            "VERDICT: accept\n",
        });
        auto placements = propose_placements(article, hub, engine);
        REQUIRE(placements.size() == 1);
        CHECK(placements[0].desired_caption == "first");
    }

    SUBCASE("max_images caps the list") {
        queue->assign({
            "PLACEMENT: section=0 paragraph=0 caption=\"a\" rationale=\"\"\n"
            "PLACEMENT: section=0 paragraph=1 caption=\"b\" rationale=\"\"\n"
            "PLACEMENT: section=1 paragraph=0 caption=\"c\" rationale=\"\"\n",
            "VERDICT: accept\n",
        });
        VisualOptions options;
        options.max_images = 2;
        CHECK(propose_placements(article, hub, engine, options).size() == 2);
    }

    SUBCASE("reader revise feeds back into a regenerate") {
        queue->assign({
            "PLACEMENT: section=0 paragraph=0 caption=\"a\" rationale=\"\"\n",
            "SUGGESTION: move it down\nVERDICT: revise\n",
            "PLACEMENT: section=0 paragraph=1 caption=\"a moved\" rationale=\"\"\n",
            "VERDICT: accept\n",
        });
        auto placements = propose_placements(article, hub, engine);
        REQUIRE(placements.size() == 1);
        CHECK(placements[0].paragraph_index == 1);
    }

    SUBCASE("no PLACEMENT lines at all is a parse error after one re-prompt") {
        queue->assign({"nothing here", "still nothing"});
        try {
            propose_placements(article, hub, engine);
            FAIL("expected PlacementParseError");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::placement_parse_error);
        }
    }
}

TEST_CASE("retrieve_candidates: three-source union with dedup and source tags") {
    auto article = two_section_article();
    auto transport = std::make_shared<providers::FunctionTransport>(
        [](const std::string& kind, const nlohmann::json& request) -> nlohmann::json {
            if (kind == "image_search") {
                auto query = request.at("query").get<std::string>();
                bool wiki = query.find("site:wikipedia.org") != std::string::npos;
                nlohmann::json hits = nlohmann::json::array();
                if (!wiki) {
                    for (int i = 0; i < 3; ++i) {
                        hits.push_back({{"url", "https://s.example/" + std::to_string(i)},
                                        {"title", "s"},
                                        {"snippet", ""},
                                        {"image_locator",
                                         "https://img.example/search" + std::to_string(i) + ".jpg"}});
                    }
                } else {
                    hits.push_back({{"url", "https://w.example/1"},
                                    {"title", "w"},
                                    {"snippet", ""},
                                    {"image_locator", "https://img.example/wiki1.jpg"}});
                    // duplicate of a plain-search locator: dedup keeps ImageSearch
                    hits.push_back({{"url", "https://w.example/2"},
                                    {"title", "w"},
                                    {"snippet", ""},
                                    {"image_locator", "https://img.example/search0.jpg"}});
                }
                return nlohmann::json{{"hits", hits}};
            }
            if (kind == "fetch_page") {
                return nlohmann::json{
                    {"status", 200},
                    {"body", "<html><img src=\"https://img.example/refpage.jpg\"></html>"}};
            }
            throw_error(Errc::transport_error, "unexpected kind " + kind);
        });
    providers::ProviderHub hub;
    hub.image_search = std::make_shared<providers::SearchClient>(
        "image_search", providers::SearchKind::Image, transport, nullptr);
    hub.page_fetcher = std::make_shared<providers::PageFetcher>("page_fetch", transport, nullptr);

    VisualOptions options;
    options.max_reference_pages = 1;
    auto candidates = retrieve_candidates(placement_at(0, 0, "castle"), article.references, hub,
                                          options);
    REQUIRE(candidates.size() == 5);  // 3 search + 1 wiki (1 dup dropped) + 1 ref page
    CHECK(candidates[0].source == CandidateSource::ImageSearch);
    int wiki_count = 0, ref_count = 0;
    for (const auto& c : candidates) {
        if (c.source == CandidateSource::Wikipedia) ++wiki_count;
        if (c.source == CandidateSource::ReferencePage) ++ref_count;
        CHECK(!c.hit.image_locator->empty());
    }
    CHECK(wiki_count == 1);
    CHECK(ref_count == 1);
}

TEST_CASE("retrieve_candidates: per-source failures are skipped; all empty errors") {
    auto article = two_section_article();
    auto failing = std::make_shared<providers::FunctionTransport>(
        [](const std::string& kind, const nlohmann::json& request) -> nlohmann::json {
            if (kind == "image_search") {
                auto query = request.at("query").get<std::string>();
                if (query.find("site:wikipedia.org") != std::string::npos) {
                    throw_error(Errc::transport_error, "wiki down");
                }
                nlohmann::json hits = nlohmann::json::array();
                hits.push_back({{"url", "https://s.example/0"},
                                {"title", "s"},
                                {"snippet", ""},
                                {"image_locator", "https://img.example/only.jpg"}});
                return nlohmann::json{{"hits", hits}};
            }
            throw_error(Errc::transport_error, "fetch down");
        });
    providers::ProviderHub hub;
    hub.image_search = std::make_shared<providers::SearchClient>(
        "image_search", providers::SearchKind::Image, failing, nullptr);
    hub.page_fetcher = std::make_shared<providers::PageFetcher>("page_fetch", failing, nullptr);

    auto candidates = retrieve_candidates(placement_at(0, 0, "c"), article.references, hub);
    CHECK(candidates.size() == 1);

    auto all_empty = std::make_shared<providers::FunctionTransport>(
        [](const std::string& kind, const nlohmann::json&) -> nlohmann::json {
            if (kind == "image_search") return nlohmann::json{{"hits", nlohmann::json::array()}};
            return nlohmann::json{{"status", 200}, {"body", "<html>no images</html>"}};
        });
    hub.image_search = std::make_shared<providers::SearchClient>(
        "image_search", providers::SearchKind::Image, all_empty, nullptr);
    hub.page_fetcher = std::make_shared<providers::PageFetcher>("page_fetch", all_empty, nullptr);
    try {
        retrieve_candidates(placement_at(0, 0, "c"), article.references, hub);
        FAIL("expected EmptyCandidates");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::empty_candidates);
    }
}

TEST_CASE("extract_image_urls resolves and filters sources") {
    std::string html =
        "<html><IMG SRC=\"/a/b.png\">"
        "<img src='https://cdn.example/c.jpg'>"
        "<img src=//mirror.example/d.gif>"
        "<img src=\"data:image/png;base64,xx\">"
        "<img src=\"relative/e.webp\">"
        "<img src=\"/a/b.png\"></html>";
    auto urls = extract_image_urls(html, "https://host.example/articles/page.html");
    REQUIRE(urls.size() == 4);
    CHECK(urls[0] == "https://host.example/a/b.png");
    CHECK(urls[1] == "https://cdn.example/c.jpg");
    CHECK(urls[2] == "https://mirror.example/d.gif");
    CHECK(urls[3] == "https://host.example/articles/relative/e.webp");
}

TEST_CASE("rank_candidates: argsort of similarities, top three") {
    std::map<std::string, double> cosines{
        {"a.jpg", 0.9}, {"b.jpg", 0.5}, {"c.jpg", 0.7}, {"d.jpg", 0.3}};
    auto hub = angle_hub(cosines);
    std::vector<ImageCandidate> candidates{
        candidate("a.jpg", CandidateSource::ImageSearch),
        candidate("b.jpg", CandidateSource::ImageSearch),
        candidate("c.jpg", CandidateSource::ImageSearch),
        candidate("d.jpg", CandidateSource::ImageSearch)};

    auto top = rank_candidates(placement_at(0, 0, "caption"), candidates, hub);
    REQUIRE(top.size() == 3);
    CHECK(*top[0].hit.image_locator == "a.jpg");
    CHECK(*top[1].hit.image_locator == "c.jpg");
    CHECK(*top[2].hit.image_locator == "b.jpg");
    CHECK(*top[0].similarity == doctest::Approx(0.9).epsilon(1e-9));

    auto two = rank_candidates(placement_at(0, 0, "caption"),
                               {candidates[0], candidates[1]}, hub);
    CHECK(two.size() == 2);
}

TEST_CASE("rank_candidates skips failing embeddings; all failing errors") {
    auto hub = angle_hub({{"ok.jpg", 0.4}});
    std::vector<ImageCandidate> mixed{candidate("fail", CandidateSource::ImageSearch),
                                      candidate("ok.jpg", CandidateSource::Wikipedia)};
    auto top = rank_candidates(placement_at(0, 0, "caption"), mixed, hub);
    REQUIRE(top.size() == 1);
    CHECK(*top[0].hit.image_locator == "ok.jpg");

    std::vector<ImageCandidate> doomed{candidate("fail", CandidateSource::ImageSearch)};
    try {
        rank_candidates(placement_at(0, 0, "caption"), doomed, hub);
        FAIL("expected AllEmbeddingsFailed");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::all_embeddings_failed);
    }
    CHECK_THROWS_AS(rank_candidates(placement_at(0, 0, "caption"), {}, hub), Error);
}

namespace {

// Independent oracle: full sort with the documented tie rule, then first 3.
std::vector<std::string> oracle_top3(const std::vector<ImageCandidate>& scored) {
    struct Row {
        double similarity;
        int priority;
        std::size_t input_index;
        std::string locator;
    };
    auto priority_of = [](CandidateSource source) {
        if (source == CandidateSource::ReferencePage) return 2;
        if (source == CandidateSource::Wikipedia) return 1;
        return 0;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        rows.push_back({*scored[i].similarity, priority_of(scored[i].source), i,
                        *scored[i].hit.image_locator});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        if (a.priority != b.priority) return a.priority > b.priority;
        return a.input_index < b.input_index;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < rows.size() && i < 3; ++i) out.push_back(rows[i].locator);
    return out;
}

}  // namespace

TEST_CASE("select_top3 equals the brute-force oracle, ties included") {
    std::mt19937 rng(31);
    const CandidateSource sources[] = {CandidateSource::ImageSearch, CandidateSource::Wikipedia,
                                       CandidateSource::ReferencePage};
    const double bucket_values[] = {0.1, 0.25, 0.5, 0.75, 0.9};  // few buckets force ties
    for (int instance = 0; instance < 300; ++instance) {
        std::size_t count = 1 + rng() % 30;
        std::vector<ImageCandidate> scored;
        for (std::size_t i = 0; i < count; ++i) {
            auto c = candidate("img" + std::to_string(i) + ".jpg", sources[rng() % 3]);
            c.similarity = bucket_values[rng() % 5];
            scored.push_back(c);
        }
        auto got = select_top3(scored);
        auto expected = oracle_top3(scored);
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(*got[i].hit.image_locator == expected[i]);
        }
        // dominance: every kept similarity >= every discarded similarity
        double weakest_kept = *got.back().similarity;
        std::size_t kept = got.size();
        if (kept == 3) {
            for (const auto& c : scored) {
                bool is_kept = false;
                for (const auto& k : got) {
                    if (k.hit.image_locator == c.hit.image_locator) is_kept = true;
                }
                if (!is_kept) CHECK(*c.similarity <= weakest_kept);
            }
        }
    }
}

TEST_CASE("select_final: parse, fallback on invalid index, provider failure") {
    auto placement = placement_at(0, 0, "the castle");
    std::vector<ImageCandidate> top3{candidate("r1.jpg", CandidateSource::ImageSearch),
                                     candidate("r2.jpg", CandidateSource::Wikipedia),
                                     candidate("r3.jpg", CandidateSource::ReferencePage)};
    for (auto& c : top3) c.similarity = 0.5;

    auto queue = std::make_shared<std::deque<std::string>>();
    auto hub = angle_hub({}, queue);

    queue->assign({"CHOICE: 2\nCAPTION: castle from the east\n"});
    auto picked = select_final(placement, top3, "nearby text", hub);
    CHECK(*picked.chosen.hit.image_locator == "r3.jpg");
    CHECK(picked.final_caption == "castle from the east");

    queue->assign({"CHOICE: 7\n"});
    auto fallback = select_final(placement, top3, "nearby text", hub);
    CHECK(*fallback.chosen.hit.image_locator == "r1.jpg");
    CHECK(fallback.final_caption == "the castle");  // desired caption kept

    queue->assign({"CHOICE: 2\n"});
    auto single = select_final(placement, {top3[1]}, "text", hub);
    CHECK(*single.chosen.hit.image_locator == "r2.jpg");

    queue->clear();  // provider failure (queue empty -> transport error)
    auto rescued = select_final(placement, top3, "text", hub);
    CHECK(*rescued.chosen.hit.image_locator == "r1.jpg");
    CHECK(rescued.final_caption == "the castle");
}

TEST_CASE("polish_article: conservation, caption edits, zero-image pass-through") {
    auto article = two_section_article();
    auto queue = std::make_shared<std::deque<std::string>>();
    auto hub = angle_hub({}, queue);
    reflection::Engine engine(hub.reflection_model);

    std::vector<PlacedImage> placed;
    for (int i = 0; i < 2; ++i) {
        PlacedImage image;
        image.placement = placement_at(i, 0, "cap" + std::to_string(i));
        image.chosen = candidate("img" + std::to_string(i) + ".jpg",
                                 CandidateSource::ImageSearch);
        image.chosen.similarity = 0.8;
        image.final_caption = "cap" + std::to_string(i);
        placed.push_back(image);
    }

    SUBCASE("editor revise updates captions, image count conserved") {
        queue->assign({
            "SUGGESTION: shorten captions\nVERDICT: revise\n",
            "CAPTION 0: cap0 tightened\nCAPTION 1: cap1 tightened\n",
            "VERDICT: accept\n",
        });
        auto result = polish_article(article, placed, hub, engine);
        REQUIRE(result.images.size() == 2);  // conservation
        CHECK(result.images[0].final_caption == "cap0 tightened");
        CHECK(result.images[1].final_caption != placed[1].final_caption);
        CHECK(result.article.placements.size() == 2);
        CHECK(core::article_invariants_hold(result.article));
    }

    SUBCASE("immediate accept leaves everything as placed") {
        queue->assign({"VERDICT: accept\n"});
        auto result = polish_article(article, placed, hub, engine);
        CHECK(result.images[0].final_caption == "cap0");
    }

    SUBCASE("zero placed images still run the loop, image set stays empty") {
        queue->assign({"VERDICT: accept\n"});
        auto result = polish_article(article, {}, hub, engine);
        CHECK(result.images.empty());
        CHECK(result.article.placements.empty());
    }

    SUBCASE("paragraph rewrites keep citation indices") {
        queue->assign({
            "SUGGESTION: explain the image\nVERDICT: revise\n",
            "PARAGRAPH 0.0: A reworded opening paragraph.\n",
            "VERDICT: accept\n",
        });
        auto result = polish_article(article, placed, hub, engine);
        CHECK(result.article.sections[0].paragraphs[0].text == "A reworded opening paragraph.");
        CHECK(result.article.sections[0].paragraphs[0].citation_indices ==
              std::vector<std::size_t>{0});
    }
}
