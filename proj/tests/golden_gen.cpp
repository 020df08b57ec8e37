// Regenerates the bundled golden fixture set: runs the full pipeline for the
// three bundled topics against the scripted backend in non-strict recorded
// mode, capturing every provider exchange under the fixture directory.
//
//   golden_fixture_gen <config.toml> <fixture_dir> <scratch_output_dir>

#include <cstdio>
#include <filesystem>

#include "scribe/cli/config.hpp"
#include "scribe/cli/pipeline.hpp"
#include "support/golden_topics.hpp"
#include "support/scripted_backend.hpp"

int main(int argc, char** argv) {
    if (argc != 4) {
        std::fprintf(stderr, "usage: %s <config.toml> <fixture_dir> <scratch_output_dir>\n",
                     argv[0]);
        return 2;
    }
    namespace fs = std::filesystem;
    fs::path config_path = argv[1];
    fs::path fixture_dir = argv[2];
    fs::path scratch = argv[3];
    fs::remove_all(fixture_dir);
    fs::remove_all(scratch);
    fs::create_directories(fixture_dir);

    auto config = scribe::cli::RunConfig::from_file(config_path);
    for (auto& [name, slot] : config.slots) {
        slot.mode.kind = scribe::providers::ProviderMode::Kind::Recorded;
        slot.mode.fixture_dir = fixture_dir.string();
        slot.mode.strict = false;
    }
    config.output_dir = scratch.string();

    auto scripted = std::make_shared<scribe::providers::FunctionTransport>(
        scribe::testing::scripted_backend());

    for (const auto& topic : scribe::testing::golden_topics()) {
        auto result = scribe::cli::run_pipeline(topic, config, scripted);
        if (result.exit_code != 0) {
            std::fprintf(stderr, "golden run failed for topic '%s' (exit %d)\n",
                         topic.text.value_or(topic.image ? topic.image->locator : "?").c_str(),
                         result.exit_code);
            return 1;
        }
    }

    std::size_t count = 0;
    for (const auto& entry : fs::directory_iterator(fixture_dir)) {
        if (entry.path().extension() == ".json") ++count;
    }
    std::printf("recorded %zu fixtures under %s\n", count, fixture_dir.string().c_str());
    return 0;
}
