#include "scribe/visual/visual.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <regex>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "scribe/errors.hpp"

namespace scribe::visual {

namespace {

constexpr const char* kLayoutPlannerSystem =
    "You are a layout planner deciding where images belong in an article. Reply one proposal per "
    "line as PLACEMENT: section=<i> paragraph=<j> caption=\"<what the image should show>\" "
    "rationale=\"<why here>\".";

constexpr const char* kPictureEditorSystem =
    "You are a picture editor choosing among candidate images for one spot in an article. Reply "
    "with CHOICE: <candidate index> and optionally CAPTION: <final caption>.";

constexpr const char* kMultimodalPolishSystem =
    "You are a multimodal copy editor. Improve how the placed images and their surrounding text "
    "work together. Reply with CAPTION <k>: <new caption> lines and optional "
    "PARAGRAPH <s>.<p>: <rewritten paragraph> lines.";

std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

std::string format_similarity(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.4f", value);
    return buffer;
}

int source_priority(CandidateSource source) {
    switch (source) {
        case CandidateSource::ReferencePage: return 2;  // cited provenance wins ties
        case CandidateSource::Wikipedia: return 1;
        case CandidateSource::ImageSearch: return 0;
    }
    return 0;
}

std::optional<std::string> scan_quoted(const std::string& line, const std::string& key) {
    auto pos = line.find(key + "=\"");
    if (pos == std::string::npos) return std::nullopt;
    auto start = pos + key.size() + 2;
    auto end = line.find('"', start);
    if (end == std::string::npos) return std::nullopt;
    return line.substr(start, end - start);
}

std::optional<std::size_t> scan_index(const std::string& line, const std::string& key) {
    auto pos = line.find(key + "=");
    if (pos == std::string::npos) return std::nullopt;
    auto start = pos + key.size() + 1;
    std::size_t end = start;
    while (end < line.size() && std::isdigit(static_cast<unsigned char>(line[end]))) ++end;
    if (end == start) return std::nullopt;
    return std::stoull(line.substr(start, end - start));
}

std::vector<core::ImagePlacement> parse_placement_reply(const std::string& text) {
    std::vector<core::ImagePlacement> placements;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        std::string t = trim(line);
        if (t.rfind("PLACEMENT:", 0) != 0) continue;
        auto section = scan_index(t, "section");
        auto paragraph = scan_index(t, "paragraph");
        auto caption = scan_quoted(t, "caption");
        if (!section || !paragraph || !caption || caption->empty()) {
            throw_error(Errc::placement_parse_error, "malformed placement line: " + t);
        }
        auto rationale = scan_quoted(t, "rationale");
        placements.push_back(
            core::ImagePlacement{*section, *paragraph, *caption, rationale.value_or("")});
    }
    if (placements.empty()) {
        throw_error(Errc::placement_parse_error, "reply carried no PLACEMENT: lines");
    }
    return placements;
}

// Bounds, one-image-per-paragraph (first wins), and the article-wide cap.
std::vector<core::ImagePlacement> normalize_placements(std::vector<core::ImagePlacement> raw,
                                                       const core::ArticleDraft& article,
                                                       const VisualOptions& options) {
    std::vector<core::ImagePlacement> out;
    std::unordered_set<std::string> taken;
    for (auto& placement : raw) {
        if (placement.section_index >= article.sections.size() ||
            placement.paragraph_index >=
                article.sections[placement.section_index].paragraphs.size()) {
            std::fprintf(stderr, "[visual] dropping out-of-range placement (section=%zu paragraph=%zu)\n",
                         placement.section_index, placement.paragraph_index);
            continue;
        }
        auto key = std::to_string(placement.section_index) + "." +
                   std::to_string(placement.paragraph_index);
        if (!taken.insert(key).second) continue;
        out.push_back(std::move(placement));
        if (out.size() == static_cast<std::size_t>(options.max_images)) break;
    }
    return out;
}

std::string render_article_outline(const core::ArticleDraft& article) {
    std::ostringstream out;
    for (std::size_t s = 0; s < article.sections.size(); ++s) {
        out << "Section " << s << ": " << article.sections[s].heading << '\n';
        const auto& paragraphs = article.sections[s].paragraphs;
        for (std::size_t p = 0; p < paragraphs.size(); ++p) {
            std::string text = paragraphs[p].text;
            if (text.size() > 200) text.resize(200);
            out << "  Paragraph " << p << ": " << text << '\n';
        }
    }
    return out.str();
}

std::string render_placements(const std::vector<core::ImagePlacement>& placements) {
    std::ostringstream out;
    for (const auto& placement : placements) {
        out << "section=" << placement.section_index << " paragraph=" << placement.paragraph_index
            << " caption=\"" << placement.desired_caption << "\" rationale=\""
            << placement.rationale << "\"\n";
    }
    return out.str();
}

}  // namespace

std::vector<core::ImagePlacement> propose_placements(const core::ArticleDraft& article,
                                                     const providers::ProviderHub& hub,
                                                     reflection::Engine& reflector,
                                                     const VisualOptions& options) {
    if (article.sections.empty()) {
        throw_error(Errc::invalid_argument, "cannot place images in an empty article");
    }

    auto propose_once = [&](const std::string& extra) {
        std::ostringstream user;
        user << "Article structure:\n" << render_article_outline(article);
        user << "Propose at most " << options.max_images
             << " placements, at most one per paragraph.\n";
        if (!extra.empty()) user << extra;
        providers::ChatRequest request;
        request.messages = {{providers::Role::System, kLayoutPlannerSystem},
                            {providers::Role::User, user.str()}};
        auto response = hub.default_model->chat(request);
        try {
            return normalize_placements(parse_placement_reply(response.text), article, options);
        } catch (const Error& e) {
            if (e.code() != Errc::placement_parse_error) throw;
            request.messages.push_back({providers::Role::Assistant, response.text});
            request.messages.push_back({providers::Role::User,
                                        "Reply again using only well-formed PLACEMENT: lines."});
            response = hub.default_model->chat(request);
            return normalize_placements(parse_placement_reply(response.text), article, options);
        }
    };

    auto initial = propose_once("");

    auto reflect_fn = [&](const std::vector<core::ImagePlacement>& proposals) {
        auto request = reflection::ReflectionRequest::make(
            reflection::Viewpoint::Reader,
            {reflection::PayloadKind::PlacementProposal, render_placements(proposals), {}},
            {reflection::Criterion::Readability, reflection::Criterion::Engagement,
             reflection::Criterion::Helpfulness},
            "Proposed image placements for the drafted article");
        return reflector.reflect(request);
    };
    auto regenerate = [&](const std::vector<core::ImagePlacement>& proposals,
                          const reflection::ReflectionFeedback& feedback) {
        std::ostringstream extra;
        extra << "Previous proposals:\n" << render_placements(proposals);
        extra << "Reviewer suggestions:\n";
        for (const auto& suggestion : feedback.suggestions) extra << "- " << suggestion << '\n';
        return propose_once(extra.str());
    };

    auto outcome = reflection::refine_loop<std::vector<core::ImagePlacement>>(
        initial, reflect_fn, regenerate, options.max_reflect_iters);
    return outcome.artifact;
}

std::vector<ImageCandidate> retrieve_candidates(const core::ImagePlacement& placement,
                                                const std::vector<core::Citation>& references,
                                                const providers::ProviderHub& hub,
                                                const VisualOptions& options) {
    const auto parent_scope = providers::LogScope::current();
    auto spawn = [&](int sub_task, std::function<std::vector<ImageCandidate>()> body) {
        return std::async(std::launch::async, [&, sub_task, body = std::move(body)] {
            providers::LogScope scope(parent_scope.stage, parent_scope.stage_ord,
                                      parent_scope.task * 100 + sub_task);
            return body();
        });
    };

    auto search_source = spawn(1, [&] {
        std::vector<ImageCandidate> out;
        for (auto& hit : hub.image_search->search(
                 {placement.desired_caption, options.search_k, providers::SearchKind::Image})) {
            out.push_back(ImageCandidate{CandidateSource::ImageSearch, std::move(hit), {}});
        }
        return out;
    });
    auto wiki_source = spawn(2, [&] {
        std::vector<ImageCandidate> out;
        for (auto& hit : hub.image_search->search({placement.desired_caption + " site:wikipedia.org",
                                                   options.search_k, providers::SearchKind::Image})) {
            out.push_back(ImageCandidate{CandidateSource::Wikipedia, std::move(hit), {}});
        }
        return out;
    });
    auto reference_source = spawn(3, [&] {
        std::vector<ImageCandidate> out;
        int fetched = 0;
        for (const auto& reference : references) {
            if (fetched == options.max_reference_pages) break;
            ++fetched;
            try {
                auto html = hub.page_fetcher->fetch(reference.url);
                for (auto& image_url : extract_image_urls(html, reference.url)) {
                    providers::SearchHit hit;
                    hit.url = reference.url;
                    hit.title = reference.title;
                    hit.snippet = reference.snippet;
                    hit.image_locator = image_url;
                    out.push_back(ImageCandidate{CandidateSource::ReferencePage, std::move(hit), {}});
                }
            } catch (const Error& e) {
                std::fprintf(stderr, "[visual] reference page skipped: %s\n", e.what());
            }
        }
        return out;
    });

    std::vector<ImageCandidate> merged;
    std::unordered_set<std::string> seen_locators;
    auto drain = [&](std::future<std::vector<ImageCandidate>>& future, const char* label) {
        try {
            for (auto& candidate : future.get()) {
                if (!candidate.hit.image_locator || candidate.hit.image_locator->empty()) continue;
                if (seen_locators.insert(*candidate.hit.image_locator).second) {
                    merged.push_back(std::move(candidate));
                }
            }
        } catch (const Error& e) {
            std::fprintf(stderr, "[visual] %s source skipped: %s\n", label, e.what());
        }
    };
    drain(search_source, "image-search");
    drain(wiki_source, "wikipedia");
    drain(reference_source, "reference-page");

    if (merged.empty()) {
        throw_error(Errc::empty_candidates,
                    "no image candidates for caption '" + placement.desired_caption + "'");
    }
    return merged;
}

std::vector<ImageCandidate> score_candidates(const core::ImagePlacement& placement,
                                             const std::vector<ImageCandidate>& candidates,
                                             const providers::ProviderHub& hub) {
    if (candidates.empty()) {
        throw_error(Errc::invalid_argument, "no candidates to score");
    }
    providers::EmbeddingVector caption_vec;
    try {
        caption_vec = hub.embedding->embed_text(placement.desired_caption);
    } catch (const Error& e) {
        throw_error(Errc::all_embeddings_failed,
                    std::string("caption embedding failed: ") + e.what());
    }

    std::vector<ImageCandidate> scored;
    for (const auto& candidate : candidates) {
        try {
            auto image_vec = hub.embedding->embed_image({*candidate.hit.image_locator, {}});
            auto copy = candidate;
            copy.similarity = providers::cosine_similarity(image_vec, caption_vec);
            scored.push_back(std::move(copy));
        } catch (const Error& e) {
            std::fprintf(stderr, "[visual] candidate skipped, embedding failed: %s\n", e.what());
        }
    }
    if (scored.empty()) {
        throw_error(Errc::all_embeddings_failed, "every candidate embedding failed");
    }
    return scored;
}

std::vector<ImageCandidate> select_top3(const std::vector<ImageCandidate>& scored) {
    std::vector<std::size_t> order(scored.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double sa = *scored[a].similarity, sb = *scored[b].similarity;
        if (sa != sb) return sa > sb;
        return source_priority(scored[a].source) > source_priority(scored[b].source);
        // equal similarity and priority: stable sort keeps input order
    });
    std::vector<ImageCandidate> top;
    for (std::size_t i = 0; i < order.size() && i < 3; ++i) top.push_back(scored[order[i]]);
    return top;
}

std::vector<ImageCandidate> rank_candidates(const core::ImagePlacement& placement,
                                            const std::vector<ImageCandidate>& candidates,
                                            const providers::ProviderHub& hub) {
    return select_top3(score_candidates(placement, candidates, hub));
}

PlacedImage select_final(const core::ImagePlacement& placement,
                         const std::vector<ImageCandidate>& top3,
                         const std::string& surrounding_text, const providers::ProviderHub& hub) {
    if (top3.empty()) {
        throw_error(Errc::invalid_argument, "select_final needs at least one candidate");
    }
    PlacedImage fallback{placement, top3.front(), placement.desired_caption};
    try {
        std::ostringstream user;
        user << "Desired image: " << placement.desired_caption << '\n'
             << "Surrounding text: " << surrounding_text << '\n'
             << "Candidates:\n";
        providers::ChatRequest request;
        for (std::size_t i = 0; i < top3.size(); ++i) {
            user << "Candidate " << i << ": " << *top3[i].hit.image_locator << " (source "
                 << to_string(top3[i].source) << ", similarity "
                 << format_similarity(top3[i].similarity.value_or(0.0)) << ")\n";
            request.attachments.push_back({*top3[i].hit.image_locator, {}});
        }
        request.messages = {{providers::Role::System, kPictureEditorSystem},
                            {providers::Role::User, user.str()}};
        auto response = hub.multimodal_model->chat(request);

        std::optional<std::size_t> choice;
        std::string caption;
        std::istringstream lines(response.text);
        std::string line;
        while (std::getline(lines, line)) {
            std::string t = trim(line);
            if (t.rfind("CHOICE:", 0) == 0 && !choice) {
                try {
                    auto value = std::stoll(trim(t.substr(7)));
                    if (value >= 0) choice = static_cast<std::size_t>(value);
                } catch (const std::exception&) {
                }
            } else if (t.rfind("CAPTION:", 0) == 0 && caption.empty()) {
                caption = trim(t.substr(8));
            }
        }
        std::size_t index = (choice && *choice < top3.size()) ? *choice : 0;
        return PlacedImage{placement, top3[index],
                           caption.empty() ? placement.desired_caption : caption};
    } catch (const Error& e) {
        std::fprintf(stderr, "[visual] final pick fell back to rank one: %s\n", e.what());
        return fallback;
    }
}

namespace {

std::string render_image_text_pairs(const core::ArticleDraft& article,
                                    const std::vector<PlacedImage>& images) {
    std::ostringstream out;
    if (images.empty()) {
        out << "No images are placed; review the article text on its own.\n";
    }
    for (std::size_t k = 0; k < images.size(); ++k) {
        const auto& placed = images[k];
        const auto& paragraph =
            article.sections[placed.placement.section_index]
                .paragraphs[placed.placement.paragraph_index];
        out << "Image " << k << ": " << *placed.chosen.hit.image_locator << '\n'
            << "Caption " << k << ": " << placed.final_caption << '\n'
            << "Anchor paragraph: " << paragraph.text << '\n';
    }
    return out.str();
}

}  // namespace

PolishResult polish_article(const core::ArticleDraft& article,
                            const std::vector<PlacedImage>& placed,
                            const providers::ProviderHub& hub, reflection::Engine& reflector,
                            const VisualOptions& options) {
    PolishResult initial;
    initial.article = article;
    initial.images = placed;
    initial.article.placements.clear();
    for (const auto& image : placed) initial.article.placements.push_back(image.placement);
    core::validate_article(initial.article);

    auto reflect_fn = [&](const PolishResult& state) {
        reflection::Payload payload;
        payload.kind = reflection::PayloadKind::ImageTextPair;
        payload.content = render_image_text_pairs(state.article, state.images);
        for (const auto& image : state.images) {
            payload.images.push_back({*image.chosen.hit.image_locator, {}});
        }
        auto request = reflection::ReflectionRequest::make(
            reflection::Viewpoint::Editor, std::move(payload),
            {reflection::Criterion::Coherence, reflection::Criterion::Consistency},
            "Final multimodal polish of the article");
        return reflector.reflect(request);
    };

    auto regenerate = [&](const PolishResult& state, const reflection::ReflectionFeedback& feedback) {
        std::ostringstream user;
        user << render_image_text_pairs(state.article, state.images);
        user << "Reviewer suggestions:\n";
        for (const auto& suggestion : feedback.suggestions) user << "- " << suggestion << '\n';

        providers::ChatRequest request;
        request.messages = {{providers::Role::System, kMultimodalPolishSystem},
                            {providers::Role::User, user.str()}};
        for (const auto& image : state.images) {
            request.attachments.push_back({*image.chosen.hit.image_locator, {}});
        }
        auto response = hub.multimodal_model->chat(request);

        PolishResult next = state;
        std::istringstream lines(response.text);
        std::string line;
        while (std::getline(lines, line)) {
            std::string t = trim(line);
            if (t.rfind("CAPTION ", 0) == 0) {
                auto colon = t.find(':');
                if (colon == std::string::npos) continue;
                try {
                    std::size_t k = std::stoull(trim(t.substr(8, colon - 8)));
                    if (k < next.images.size()) {
                        auto caption = trim(t.substr(colon + 1));
                        if (!caption.empty()) next.images[k].final_caption = caption;
                    }
                } catch (const std::exception&) {
                }
            } else if (t.rfind("PARAGRAPH ", 0) == 0) {
                auto colon = t.find(':');
                auto dot = t.find('.', 10);
                if (colon == std::string::npos || dot == std::string::npos || dot > colon) continue;
                try {
                    std::size_t s = std::stoull(trim(t.substr(10, dot - 10)));
                    std::size_t p = std::stoull(trim(t.substr(dot + 1, colon - dot - 1)));
                    if (s < next.article.sections.size() &&
                        p < next.article.sections[s].paragraphs.size()) {
                        auto body = trim(t.substr(colon + 1));
                        // Text only; citation indices stay untouched.
                        if (!body.empty()) next.article.sections[s].paragraphs[p].text = body;
                    }
                } catch (const std::exception&) {
                }
            }
        }
        return next;
    };

    auto outcome = reflection::refine_loop<PolishResult>(initial, reflect_fn, regenerate,
                                                         options.max_reflect_iters);
    core::validate_article(outcome.artifact.article);
    if (outcome.artifact.images.size() != placed.size()) {
        throw_error(Errc::invalid_article, "polishing changed the image count");
    }
    return outcome.artifact;
}

std::vector<std::string> extract_image_urls(const std::string& html, const std::string& page_url) {
    // scheme://host and the directory of the page path, for resolving
    // relative sources.
    std::string scheme_host, base_dir = "/";
    auto scheme_end = page_url.find("://");
    if (scheme_end != std::string::npos) {
        auto path_start = page_url.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            scheme_host = page_url;
        } else {
            scheme_host = page_url.substr(0, path_start);
            auto last_slash = page_url.find_last_of('/');
            base_dir = page_url.substr(path_start, last_slash - path_start + 1);
        }
    }

    static const std::regex img_tag(R"(<img\b[^>]*>)", std::regex::icase);
    static const std::regex src_attr(R"rx(\bsrc\s*=\s*("([^"]*)"|'([^']*)'|([^\s>]+)))rx",
                                     std::regex::icase);

    std::vector<std::string> urls;
    std::unordered_set<std::string> seen;
    for (auto it = std::sregex_iterator(html.begin(), html.end(), img_tag);
         it != std::sregex_iterator(); ++it) {
        std::string tag = it->str();
        std::smatch m;
        if (!std::regex_search(tag, m, src_attr)) continue;
        std::string src = m[2].matched ? m[2].str() : (m[3].matched ? m[3].str() : m[4].str());
        src = trim(src);
        if (src.empty() || src.rfind("data:", 0) == 0) continue;

        std::string resolved;
        if (src.rfind("http://", 0) == 0 || src.rfind("https://", 0) == 0) {
            resolved = src;
        } else if (src.rfind("//", 0) == 0) {
            resolved = "https:" + src;
        } else if (!scheme_host.empty() && src.front() == '/') {
            resolved = scheme_host + src;
        } else if (!scheme_host.empty()) {
            resolved = scheme_host + base_dir + src;
        } else {
            continue;
        }
        if (seen.insert(resolved).second) urls.push_back(resolved);
    }
    return urls;
}

std::string_view to_string(CandidateSource source) {
    switch (source) {
        case CandidateSource::ImageSearch: return "image_search";
        case CandidateSource::Wikipedia: return "wikipedia";
        case CandidateSource::ReferencePage: return "reference_page";
    }
    return "image_search";
}

namespace {

CandidateSource source_from_string(std::string_view name) {
    if (name == "image_search") return CandidateSource::ImageSearch;
    if (name == "wikipedia") return CandidateSource::Wikipedia;
    if (name == "reference_page") return CandidateSource::ReferencePage;
    throw_error(Errc::invalid_argument, "unknown candidate source: " + std::string(name));
}

}  // namespace

void to_json(nlohmann::json& j, const ImageCandidate& v) {
    j = nlohmann::json{{"source", to_string(v.source)}, {"hit", v.hit}};
    if (v.similarity) j["similarity"] = *v.similarity;
}

void from_json(const nlohmann::json& j, ImageCandidate& v) {
    v = ImageCandidate{};
    v.source = source_from_string(j.at("source").get<std::string>());
    j.at("hit").get_to(v.hit);
    if (j.contains("similarity")) v.similarity = j.at("similarity").get<double>();
}

void to_json(nlohmann::json& j, const PlacedImage& v) {
    j = nlohmann::json{{"placement", v.placement},
                       {"chosen", v.chosen},
                       {"final_caption", v.final_caption}};
}

void from_json(const nlohmann::json& j, PlacedImage& v) {
    j.at("placement").get_to(v.placement);
    j.at("chosen").get_to(v.chosen);
    j.at("final_caption").get_to(v.final_caption);
}

}  // namespace scribe::visual
