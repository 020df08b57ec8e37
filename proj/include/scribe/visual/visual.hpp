#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scribe/core/types.hpp"
#include "scribe/providers/clients.hpp"
#include "scribe/reflection/reflection.hpp"

namespace scribe::visual {

enum class CandidateSource { ImageSearch, Wikipedia, ReferencePage };

struct ImageCandidate {
    CandidateSource source = CandidateSource::ImageSearch;
    providers::SearchHit hit;  // image_locator always set
    std::optional<double> similarity;  // set once ranked
};

struct PlacedImage {
    core::ImagePlacement placement;
    ImageCandidate chosen;  // similarity present
    std::string final_caption;
};

struct VisualOptions {
    int max_images = 5;          // article-wide placement cap
    int search_k = 5;
    int max_reference_pages = 5; // reference urls fetched per placement
    int max_reflect_iters = 3;
};

// LLM image-positioning proposals, refined once through the reader-viewpoint
// reflection loop. Out-of-range indices are dropped with a warning; at most
// one placement per paragraph (first wins) and max_images overall.
std::vector<core::ImagePlacement> propose_placements(const core::ArticleDraft& article,
                                                     const providers::ProviderHub& hub,
                                                     reflection::Engine& reflector,
                                                     const VisualOptions& options = {});

// Union of image search, a Wikipedia-scoped search, and images scraped from
// fetched reference pages, deduplicated by locator (first seen wins, source
// order as listed). Per-source failures are skipped; EmptyCandidates only
// when all three sources come back empty.
std::vector<ImageCandidate> retrieve_candidates(const core::ImagePlacement& placement,
                                                const std::vector<core::Citation>& references,
                                                const providers::ProviderHub& hub,
                                                const VisualOptions& options = {});

// Candidates with similarity = cosine(embed_image(candidate), embed_text
// (caption)), input order preserved. Candidates whose embedding fails are
// dropped; AllEmbeddingsFailed when none survive.
std::vector<ImageCandidate> score_candidates(const core::ImagePlacement& placement,
                                             const std::vector<ImageCandidate>& candidates,
                                             const providers::ProviderHub& hub);

// Pure top-3 selection over scored candidates: similarity descending, ties by
// source priority ReferencePage > Wikipedia > ImageSearch, then input order.
std::vector<ImageCandidate> select_top3(const std::vector<ImageCandidate>& scored);

// score_candidates + select_top3.
std::vector<ImageCandidate> rank_candidates(const core::ImagePlacement& placement,
                                            const std::vector<ImageCandidate>& candidates,
                                            const providers::ProviderHub& hub);

// Multimodal pick among the top-3 (CHOICE: <0-based index>, optional
// CAPTION:). Invalid index or provider failure falls back to rank one with
// the desired caption.
PlacedImage select_final(const core::ImagePlacement& placement,
                         const std::vector<ImageCandidate>& top3,
                         const std::string& surrounding_text,
                         const providers::ProviderHub& hub);

struct PolishResult {
    core::ArticleDraft article;
    std::vector<PlacedImage> images;
};

// Anchors the chosen images in the draft and runs the editor-viewpoint
// multimodal revision loop. Only captions and anchor paragraphs change;
// images are never added or removed and citation validity is preserved.
PolishResult polish_article(const core::ArticleDraft& article,
                            const std::vector<PlacedImage>& placed,
                            const providers::ProviderHub& hub, reflection::Engine& reflector,
                            const VisualOptions& options = {});

// img src attributes from static HTML, document order, deduplicated,
// resolved against the page url. No script execution.
std::vector<std::string> extract_image_urls(const std::string& html, const std::string& page_url);

std::string_view to_string(CandidateSource source);

void to_json(nlohmann::json& j, const ImageCandidate& v);
void from_json(const nlohmann::json& j, ImageCandidate& v);
void to_json(nlohmann::json& j, const PlacedImage& v);
void from_json(const nlohmann::json& j, PlacedImage& v);

}  // namespace scribe::visual
