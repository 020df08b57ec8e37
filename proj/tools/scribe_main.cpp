// scribe: multi-agent generation of cited, image-illustrated wiki-style
// articles, plus rubric evaluation and benchmark curation.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "scribe/cli/config.hpp"
#include "scribe/cli/pipeline.hpp"
#include "scribe/errors.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string fixtures_dir;
    bool offline = false;
};

// Config file, then --offline / --fixtures overrides. Without a config file
// an offline fixture set is enough; live mode needs endpoints.
scribe::cli::RunConfig resolve_config(const CommonArgs& args) {
    scribe::cli::RunConfig config;
    if (!args.config_path.empty()) {
        config = scribe::cli::RunConfig::from_file(args.config_path);
    } else if (!args.fixtures_dir.empty()) {
        config = scribe::cli::RunConfig::offline_defaults(args.fixtures_dir);
    } else {
        scribe::throw_error(scribe::Errc::config_error,
                            "need --config, or --fixtures for an offline run");
    }
    if (args.offline || !args.fixtures_dir.empty()) {
        config.force_offline(args.fixtures_dir);
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scribe: topic in, cited multimodal wiki-style article out"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string topic_text, topic_image, topic_alt, topic_id, out_dir;
    std::int64_t seed_override = -1;
    bool seed_set = false;

    auto* run = app.add_subcommand("run", "Generate an article for one topic");
    run->add_option("--topic-text", topic_text, "Topic text");
    run->add_option("--topic-image", topic_image, "Topic image URL or path");
    run->add_option("--topic-alt", topic_alt, "Alt text for the topic image");
    run->add_option("--topic-id", topic_id, "Explicit topic id (defaults to a content hash)");
    run->add_option("--config", common.config_path, "Run config file (TOML-style)");
    run->add_option("--fixtures", common.fixtures_dir, "Fixture directory for recorded mode");
    run->add_option("--out", out_dir, "Output directory (overrides config)");
    run->add_option("--seed", seed_override, "Seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    run->add_flag("--offline", common.offline, "Force recorded strict mode on every slot");

    std::string article_path, topic_path, report_path = "report.json";
    auto* evaluate = app.add_subcommand("evaluate", "Score a generated article");
    evaluate->add_option("--article", article_path, "article.json produced by run")->required();
    evaluate->add_option("--topic", topic_path, "topic.json produced by run")->required();
    evaluate->add_option("--config", common.config_path, "Run config file");
    evaluate->add_option("--fixtures", common.fixtures_dir, "Fixture directory for recorded mode");
    evaluate->add_option("--out", report_path, "Report path");
    evaluate->add_flag("--offline", common.offline, "Force recorded strict mode on every slot");

    std::string corpus_path, manifest_path = "wikiseek_manifest.json";
    std::uint64_t quota = 100, curate_seed = 0;
    auto* curate = app.add_subcommand("curate", "Curate benchmark topics from a JSONL corpus");
    curate->add_option("--corpus", corpus_path, "Corpus file, one entry per line")->required();
    curate->add_option("--quota", quota, "Topics to keep per difficulty level");
    curate->add_option("--seed", curate_seed, "Sampling seed");
    curate->add_option("--out", manifest_path, "Manifest path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            auto config = resolve_config(common);
            if (!out_dir.empty()) config.output_dir = out_dir;
            if (seed_set) config.seed = seed_override;

            scribe::core::Topic topic;
            topic.id = topic_id;
            if (!topic_text.empty()) topic.text = topic_text;
            if (!topic_image.empty()) {
                scribe::core::ImageRef image{topic_image, {}};
                if (!topic_alt.empty()) image.alt_text = topic_alt;
                topic.image = image;
            }
            auto result = scribe::cli::run_pipeline(topic, config);
            if (result.exit_code == scribe::cli::kExitOk) {
                std::printf("article written under %s\n", result.run_dir.string().c_str());
            }
            return result.exit_code;
        }
        if (evaluate->parsed()) {
            auto config = resolve_config(common);
            return scribe::cli::evaluate_article(article_path, topic_path, config, report_path);
        }
        if (curate->parsed()) {
            return scribe::cli::curate_corpus(corpus_path, quota, curate_seed, manifest_path);
        }
    } catch (const scribe::Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return e.code() == scribe::Errc::config_error || e.code() == scribe::Errc::io_error
                   ? scribe::cli::kExitInputError
                   : scribe::cli::kExitStageFailure;
    }
    return scribe::cli::kExitOk;
}
