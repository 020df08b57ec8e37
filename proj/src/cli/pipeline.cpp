#include "scribe/cli/pipeline.hpp"

#include <fstream>
#include <future>
#include <sstream>

#include "scribe/composer/composer.hpp"
#include "scribe/errors.hpp"
#include "scribe/evalbench/evalbench.hpp"
#include "scribe/exploration/exploration.hpp"
#include "scribe/outline/outline.hpp"
#include "scribe/providers/clock.hpp"
#include "scribe/reflection/reflection.hpp"

namespace scribe::cli {

namespace {

// Epoch used by the deterministic offline clock: 2025-01-01T00:00:00Z.
constexpr std::int64_t kOfflineEpochMs = 1735689600000;

int exit_code_for(Errc code) {
    switch (code) {
        case Errc::empty_topic:
        case Errc::empty_text:
        case Errc::invalid_argument:
        case Errc::config_error:
        case Errc::io_error: return kExitInputError;
        default: return kExitStageFailure;
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw_error(Errc::io_error, "cannot write " + path.string());
    out << content;
    if (content.empty() || content.back() != '\n') out << '\n';
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
    write_text_file(path, doc.dump(2));
}

bool all_slots_recorded(const RunConfig& config) {
    for (const auto& [name, slot] : config.slots) {
        if (slot.mode.kind != providers::ProviderMode::Kind::Recorded) return false;
    }
    return true;
}

std::map<std::string, providers::SlotConfig> slots_with_page_fetch(const RunConfig& config) {
    auto slots = config.slots;
    if (!slots.count("page_fetch")) slots["page_fetch"] = slots.at("embedding");
    return slots;
}

}  // namespace

std::string render_article_markdown(const core::ArticleDraft& article,
                                    const std::vector<visual::PlacedImage>& images) {
    std::ostringstream out;
    bool first = true;
    for (std::size_t s = 0; s < article.sections.size(); ++s) {
        const auto& section = article.sections[s];
        if (!first) out << '\n';
        first = false;
        out << "## " << section.heading << "\n";
        for (std::size_t p = 0; p < section.paragraphs.size(); ++p) {
            const auto& paragraph = section.paragraphs[p];
            out << '\n' << paragraph.text;
            for (std::size_t index : paragraph.citation_indices) {
                out << " [" << (index + 1) << ']';
            }
            out << '\n';
            for (const auto& image : images) {
                if (image.placement.section_index == s && image.placement.paragraph_index == p) {
                    out << "\n![" << image.final_caption << "]("
                        << *image.chosen.hit.image_locator << ")\n";
                }
            }
        }
    }
    if (!article.references.empty()) {
        out << "\n## References\n\n";
        for (std::size_t i = 0; i < article.references.size(); ++i) {
            const auto& reference = article.references[i];
            out << (i + 1) << ". [" << reference.title << "](" << reference.url << ")\n";
        }
    }
    return out.str();
}

RunResult run_pipeline(const core::Topic& topic, const RunConfig& config,
                       std::shared_ptr<providers::Transport> scripted) {
    RunResult result;
    nlohmann::json manifest;
    manifest["status"] = "ok";
    manifest["stage_timings_ms"] = nlohmann::json::object();
    manifest["artifact_paths"] = nlohmann::json::object();

    core::ValidatedTopic validated;
    try {
        config.validate();
        validated = core::validate_topic(topic);
    } catch (const Error& e) {
        std::fprintf(stderr, "[run] %s\n", e.what());
        result.exit_code = exit_code_for(e.code());
        return result;
    }

    const bool offline = all_slots_recorded(config);
    std::shared_ptr<providers::Clock> clock;
    if (offline) {
        clock = std::make_shared<providers::TickClock>(kOfflineEpochMs);
    } else {
        clock = std::make_shared<providers::SystemClock>();
    }
    auto log = std::make_shared<providers::RequestLog>();
    auto feedback_log = std::make_shared<reflection::FeedbackLog>();

    auto run_dir = std::filesystem::path(config.output_dir) / validated.topic.id;
    std::filesystem::create_directories(run_dir);
    result.run_dir = run_dir;

    manifest["topic"] = validated.topic;
    manifest["modality"] = core::to_string(validated.modality);
    manifest["config_digest"] = config.digest();

    auto add_artifact = [&](const std::string& name, const std::string& filename) {
        manifest["artifact_paths"][name] = filename;  // relative to the run dir
    };
    write_json_file(run_dir / "topic.json", validated.topic);
    add_artifact("topic", "topic.json");

    providers::ProviderHub hub;
    try {
        hub = providers::ProviderHub::make(slots_with_page_fetch(config), clock, log, scripted);
    } catch (const Error& e) {
        std::fprintf(stderr, "[run] %s\n", e.what());
        result.exit_code = exit_code_for(e.code());
        return result;
    }
    reflection::Engine reflector(hub.reflection_model, feedback_log);

    outline::CapitalizedNgramExtractor extractor;
    outline::OutlineOptions outline_options;
    outline_options.metadata_search_k = config.budget.search_k;
    composer::ComposeOptions compose_options;
    compose_options.max_reflect_iters = config.max_reflect_iters;
    visual::VisualOptions visual_options;
    visual_options.max_images = config.max_images;
    visual_options.search_k = config.budget.search_k;
    visual_options.max_reference_pages = config.max_reference_pages;
    visual_options.max_reflect_iters = config.max_reflect_iters;

    outline::OutlinePlan plan;
    std::vector<exploration::Persona> personas;
    std::vector<exploration::DiscussionTurn> turns;
    exploration::EvidenceBank bank;
    core::ArticleDraft article;
    std::vector<core::ImagePlacement> placements;
    std::vector<visual::PlacedImage> placed;
    nlohmann::json placement_audits = nlohmann::json::array();

    std::string current_stage = "outline";
    int stage_ord = 0;
    auto stage = [&](const std::string& name, auto&& body) {
        current_stage = name;
        providers::LogScope scope(name, ++stage_ord);
        auto start = clock->now_ms();
        body();
        manifest["stage_timings_ms"][name] = clock->now_ms() - start;
    };

    try {
        stage("outline", [&] {
            auto brief = outline::interpret_topic(validated, hub, extractor, outline_options);
            plan = outline::propose_outline(brief, validated.topic.id, hub, outline_options);
            write_json_file(run_dir / "outline.json", plan);
            add_artifact("outline", "outline.json");
        });

        stage("personas", [&] {
            personas = exploration::generate_personas(plan, config.n_personas, hub);
        });

        stage("exploration", [&] {
            reflector.supervise({reflection::PayloadKind::TranscriptExcerpt,
                                 outline::outline_to_markup(plan),
                                 {}},
                                reflection::Stage::Exploration, "Entering knowledge exploration");
            turns = exploration::run_discussion(plan, personas, config.budget, hub, reflector);
            write_json_file(run_dir / "transcript.json", turns);
            add_artifact("transcript", "transcript.json");
        });

        stage("composition", [&] {
            bank = exploration::collect_evidence(turns, providers::iso8601_utc(clock->now_ms()));
            std::ostringstream bank_summary;
            for (const auto& item : bank.items) {
                bank_summary << "- " << item.citation.title << '\n';
            }
            reflector.supervise(
                {reflection::PayloadKind::TranscriptExcerpt, bank_summary.str(), {}},
                reflection::Stage::Drafting, "Entering article drafting");
            article = composer::compose_article(validated.topic.id, plan, bank, hub, reflector,
                                                compose_options);
            write_text_file(run_dir / "article.text.md", core::to_markdown(article));
            add_artifact("article_text", "article.text.md");
        });

        stage("placement", [&] {
            reflector.supervise({reflection::PayloadKind::SectionDraft,
                                 core::to_markdown(article),
                                 {}},
                                reflection::Stage::Placement, "Entering image placement");
            placements = visual::propose_placements(article, hub, reflector, visual_options);
        });

        stage("retrieval", [&] {
            const auto parent_scope = providers::LogScope::current();
            std::vector<std::future<nlohmann::json>> futures;
            for (std::size_t i = 0; i < placements.size(); ++i) {
                futures.push_back(std::async(std::launch::async, [&, i] {
                    providers::LogScope scope(parent_scope.stage, parent_scope.stage_ord,
                                              static_cast<int>(i) + 1);
                    const auto& placement = placements[i];
                    auto candidates = visual::retrieve_candidates(placement, article.references,
                                                                  hub, visual_options);
                    auto scored = visual::score_candidates(placement, candidates, hub);
                    auto top3 = visual::select_top3(scored);
                    const auto& anchor = article.sections[placement.section_index]
                                             .paragraphs[placement.paragraph_index];
                    auto chosen = visual::select_final(placement, top3, anchor.text, hub);
                    return nlohmann::json{{"placement", placement},
                                          {"candidates", scored},
                                          {"top3", top3},
                                          {"chosen", chosen}};
                }));
            }
            for (auto& future : futures) {
                auto audit = future.get();
                placed.push_back(audit.at("chosen").get<visual::PlacedImage>());
                placement_audits.push_back(std::move(audit));
            }
        });

        stage("polishing", [&] {
            std::ostringstream caption_list;
            for (const auto& image : placed) caption_list << "- " << image.final_caption << '\n';
            reflector.supervise({reflection::PayloadKind::ImageTextPair, caption_list.str(), {}},
                                reflection::Stage::Polishing, "Entering multimodal polish");
            auto polished = visual::polish_article(article, placed, hub, reflector, visual_options);
            article = polished.article;
            placed = polished.images;

            write_json_file(run_dir / "images.json",
                            nlohmann::json{{"placements", placement_audits}, {"images", placed}});
            add_artifact("images", "images.json");
            write_text_file(run_dir / "article.md", render_article_markdown(article, placed));
            add_artifact("article", "article.md");
            write_json_file(run_dir / "article.json", article);
            add_artifact("article_json", "article.json");
        });
    } catch (const Error& e) {
        std::fprintf(stderr, "[run] stage %s failed: %s\n", current_stage.c_str(), e.what());
        manifest["status"] = "failed";
        manifest["failing_stage"] = current_stage;
        manifest["error"] = e.what();
        result.exit_code = exit_code_for(e.code());
    }

    // Always persisted, success or not: the reflection log, the request log,
    // and the manifest itself.
    write_json_file(run_dir / "reflection_log.json", feedback_log->to_json());
    add_artifact("reflection_log", "reflection_log.json");
    write_json_file(run_dir / "requests.log.json", log->to_json());
    add_artifact("request_log", "requests.log.json");

    nlohmann::json call_counts = nlohmann::json::object();
    for (const auto& entry : log->sorted_entries()) {
        auto key = entry.slot;
        call_counts[key] = call_counts.value(key, 0) + 1;
    }
    manifest["provider_call_counts"] = call_counts;
    add_artifact("manifest", "manifest.json");
    write_json_file(run_dir / "manifest.json", manifest);
    result.manifest = manifest;
    return result;
}

int evaluate_article(const std::filesystem::path& article_path,
                     const std::filesystem::path& topic_path, const RunConfig& config,
                     const std::filesystem::path& report_path,
                     std::shared_ptr<providers::Transport> scripted) {
    core::ArticleDraft article;
    core::Topic topic;
    try {
        std::ifstream article_in(article_path);
        if (!article_in) throw_error(Errc::io_error, "cannot read " + article_path.string());
        nlohmann::json article_doc;
        article_in >> article_doc;
        article = article_doc.get<core::ArticleDraft>();
        core::validate_article(article);

        std::ifstream topic_in(topic_path);
        if (!topic_in) throw_error(Errc::io_error, "cannot read " + topic_path.string());
        nlohmann::json topic_doc;
        topic_in >> topic_doc;
        topic = topic_doc.get<core::Topic>();
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "[evaluate] malformed input: %s\n", e.what());
        return kExitInputError;
    } catch (const Error& e) {
        std::fprintf(stderr, "[evaluate] %s\n", e.what());
        return kExitInputError;
    }

    try {
        const bool offline = all_slots_recorded(config);
        std::shared_ptr<providers::Clock> clock;
        if (offline) {
            clock = std::make_shared<providers::TickClock>(kOfflineEpochMs);
        } else {
            clock = std::make_shared<providers::SystemClock>();
        }
        auto log = std::make_shared<providers::RequestLog>();
        auto hub = providers::ProviderHub::make(slots_with_page_fetch(config), clock, log, scripted);

        auto text_scores = evalbench::score_text(article, topic, hub);

        std::optional<evalbench::ImageScores> image_scores;
        if (!article.placements.empty()) {
            auto images_path = article_path.parent_path() / "images.json";
            std::ifstream images_in(images_path);
            if (images_in) {
                nlohmann::json images_doc;
                images_in >> images_doc;
                auto images = images_doc.at("images").get<std::vector<visual::PlacedImage>>();
                if (!images.empty()) {
                    image_scores = evalbench::score_images(article, images, hub);
                }
            } else {
                std::fprintf(stderr, "[evaluate] placements present but no images.json beside the "
                                     "article; scoring text only\n");
            }
        }

        auto report = evalbench::aggregate(article.topic_id, text_scores, image_scores);
        write_json_file(report_path, report);
        return kExitOk;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "[evaluate] malformed images.json: %s\n", e.what());
        return kExitInputError;
    } catch (const Error& e) {
        std::fprintf(stderr, "[evaluate] %s\n", e.what());
        return exit_code_for(e.code());
    }
}

int curate_corpus(const std::filesystem::path& corpus_path, std::uint64_t quota,
                  std::uint64_t seed, const std::filesystem::path& manifest_path) {
    std::ifstream in(corpus_path);
    if (!in) {
        std::fprintf(stderr, "[curate] cannot read %s\n", corpus_path.string().c_str());
        return kExitInputError;
    }
    bool parse_failed = false;
    auto next_entry = [&]() -> std::optional<evalbench::CorpusEntry> {
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                return nlohmann::json::parse(line).get<evalbench::CorpusEntry>();
            } catch (const nlohmann::json::exception& e) {
                std::fprintf(stderr, "[curate] malformed corpus line: %s\n", e.what());
                parse_failed = true;
                return std::nullopt;
            }
        }
        return std::nullopt;
    };

    try {
        auto result = evalbench::curate_topics(next_entry, quota, seed);
        if (parse_failed) return kExitInputError;
        write_json_file(manifest_path, result.manifest());
        return kExitOk;
    } catch (const Error& e) {
        std::fprintf(stderr, "[curate] %s\n", e.what());
        return exit_code_for(e.code());
    }
}

}  // namespace scribe::cli
