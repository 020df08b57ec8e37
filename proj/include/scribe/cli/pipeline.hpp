#pragma once

#include <filesystem>
#include <memory>

#include <nlohmann/json.hpp>

#include "scribe/cli/config.hpp"
#include "scribe/core/types.hpp"
#include "scribe/providers/transport.hpp"
#include "scribe/visual/visual.hpp"

namespace scribe::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitStageFailure = 1;  // provider or stage failure
inline constexpr int kExitInputError = 2;    // bad inputs or config

struct RunResult {
    int exit_code = kExitOk;
    std::filesystem::path run_dir;
    nlohmann::json manifest;
};

// Full pipeline for one topic: validate, interpret/outline, personas,
// discussion, composition (per-section refine loops), placements,
// retrieve/rank/select, polish, persist. Artifacts land under
// <output_dir>/<topic-id>/; a stage failure aborts the run but keeps
// everything persisted so far, and the manifest records the failing stage.
//
// `scripted` (tests and the fixture generator only) becomes the live side of
// every slot transport.
RunResult run_pipeline(const core::Topic& topic, const RunConfig& config,
                       std::shared_ptr<providers::Transport> scripted = nullptr);

// Scores a persisted article (plus its images.json when present) and writes
// report.json.
int evaluate_article(const std::filesystem::path& article_path,
                     const std::filesystem::path& topic_path, const RunConfig& config,
                     const std::filesystem::path& report_path,
                     std::shared_ptr<providers::Transport> scripted = nullptr);

// Streams a JSONL corpus through curation and writes the manifest.
int curate_corpus(const std::filesystem::path& corpus_path, std::uint64_t quota,
                  std::uint64_t seed, const std::filesystem::path& manifest_path);

// Markdown with the placed images anchored after their paragraphs.
std::string render_article_markdown(const core::ArticleDraft& article,
                                    const std::vector<visual::PlacedImage>& images);

}  // namespace scribe::cli
