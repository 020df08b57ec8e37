#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "scribe/exploration/exploration.hpp"
#include "scribe/providers/clients.hpp"

namespace scribe::cli {

// Everything a run needs: generation knobs plus one ProviderMode per slot.
// Env vars may override provider credentials (api_key_env names which), never
// behavior, so identical configs reproduce identical runs.
struct RunConfig {
    int n_personas = 3;
    exploration::ExplorationBudget budget;
    int max_reflect_iters = 3;
    int max_images = 5;
    int max_reference_pages = 5;
    std::map<std::string, providers::SlotConfig> slots;
    std::string output_dir = "runs";
    std::int64_t seed = 0;

    void validate() const;

    // The behavioral part of the config: knobs, seed, slot modes and models,
    // but no local paths. Its digest identifies the run semantics.
    nlohmann::json behavioral_json() const;
    std::string digest() const;

    // Rewrites every slot to Recorded strict mode; `fixture_dir` (when
    // non-empty) overrides each slot's fixture directory.
    void force_offline(const std::string& fixture_dir);

    // Minimal offline config: every slot recorded strict at `fixture_dir`.
    static RunConfig offline_defaults(const std::string& fixture_dir);

    // TOML-style key/value document; see README for the accepted keys.
    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_toml(const std::string& text);
};

}  // namespace scribe::cli
