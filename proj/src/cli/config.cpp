#include "scribe/cli/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scribe/errors.hpp"
#include "scribe/providers/digest.hpp"

namespace scribe::cli {

namespace {

const char* kAllSlots[] = {"default_model", "multimodal_model", "reflection_model",
                           "web_search",    "image_search",     "embedding",
                           "page_fetch"};

std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

// key = value lines under [section] headers; strings quoted, integers and
// booleans bare, # comments. That subset covers RunConfig.
std::map<std::string, std::string> parse_kv_document(const std::string& text) {
    std::map<std::string, std::string> values;
    std::string section;
    std::istringstream stream(text);
    std::string raw_line;
    int line_no = 0;
    while (std::getline(stream, raw_line)) {
        ++line_no;
        auto hash = raw_line.find('#');
        std::string line = trim(hash == std::string::npos ? raw_line : raw_line.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw_error(Errc::config_error,
                            "line " + std::to_string(line_no) + ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw_error(Errc::config_error,
                        "line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        values[section.empty() ? key : section + "." + key] = value;
    }
    return values;
}

std::int64_t to_int(const std::string& key, const std::string& value) {
    try {
        return std::stoll(value);
    } catch (const std::exception&) {
        throw_error(Errc::config_error, key + " must be an integer, got '" + value + "'");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw_error(Errc::config_error, key + " must be true or false, got '" + value + "'");
}

}  // namespace

void RunConfig::validate() const {
    if (n_personas < 1 || max_reflect_iters < 1 || max_images < 1 || max_reference_pages < 1) {
        throw_error(Errc::config_error, "all numeric run parameters must be >= 1");
    }
    exploration::validate_budget(budget);
    for (const char* name : kAllSlots) {
        if (std::string(name) == "page_fetch") continue;  // optional, defaults to embedding's mode
        if (!slots.count(name)) {
            throw_error(Errc::config_error, std::string("missing provider slot: ") + name);
        }
    }
    if (output_dir.empty()) {
        throw_error(Errc::config_error, "output_dir must not be empty");
    }
}

nlohmann::json RunConfig::behavioral_json() const {
    nlohmann::json slot_view = nlohmann::json::object();
    for (const auto& [name, slot] : slots) {
        slot_view[name] = {
            {"mode", slot.mode.kind == providers::ProviderMode::Kind::Live ? "live" : "recorded"},
            {"strict", slot.mode.strict},
            {"model_tag", slot.model_tag},
            {"embedding_dim", slot.embedding_dim},
            {"endpoint", slot.mode.live.url},
            {"rate_limit_per_minute", slot.mode.live.rate_limit_per_minute},
        };
    }
    return nlohmann::json{
        {"n_personas", n_personas},
        {"budget",
         {{"max_rounds_per_section", budget.max_rounds_per_section},
          {"max_queries_per_turn", budget.max_queries_per_turn},
          {"search_k", budget.search_k}}},
        {"max_reflect_iters", max_reflect_iters},
        {"max_images", max_images},
        {"max_reference_pages", max_reference_pages},
        {"seed", seed},
        {"slots", slot_view},
    };
}

std::string RunConfig::digest() const {
    return providers::request_digest("run_config", behavioral_json());
}

void RunConfig::force_offline(const std::string& fixture_dir) {
    for (auto& [name, slot] : slots) {
        std::string dir = fixture_dir.empty() ? slot.mode.fixture_dir : fixture_dir;
        auto tag = slot.model_tag;
        auto dim = slot.embedding_dim;
        slot = providers::SlotConfig{providers::ProviderMode::recorded(dir, true), tag, dim};
    }
}

RunConfig RunConfig::offline_defaults(const std::string& fixture_dir) {
    RunConfig config;
    for (const char* name : kAllSlots) {
        providers::SlotConfig slot;
        slot.mode = providers::ProviderMode::recorded(fixture_dir, true);
        slot.model_tag = std::string(name).find("model") != std::string::npos ? name : "";
        config.slots[name] = slot;
    }
    return config;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_error(Errc::io_error, "cannot read config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_toml(buffer.str());
}

RunConfig RunConfig::from_toml(const std::string& text) {
    RunConfig config;
    auto values = parse_kv_document(text);

    for (const auto& [key, value] : values) {
        if (key == "n_personas") config.n_personas = static_cast<int>(to_int(key, value));
        else if (key == "max_reflect_iters") config.max_reflect_iters = static_cast<int>(to_int(key, value));
        else if (key == "max_images") config.max_images = static_cast<int>(to_int(key, value));
        else if (key == "max_reference_pages") config.max_reference_pages = static_cast<int>(to_int(key, value));
        else if (key == "seed") config.seed = to_int(key, value);
        else if (key == "output_dir") config.output_dir = value;
        else if (key == "budget.max_rounds_per_section") config.budget.max_rounds_per_section = static_cast<int>(to_int(key, value));
        else if (key == "budget.max_queries_per_turn") config.budget.max_queries_per_turn = static_cast<int>(to_int(key, value));
        else if (key == "budget.search_k") config.budget.search_k = static_cast<int>(to_int(key, value));
        else if (key.rfind("providers.", 0) == 0) {
            auto rest = key.substr(10);
            auto dot = rest.find('.');
            if (dot == std::string::npos) {
                throw_error(Errc::config_error, "malformed provider key: " + key);
            }
            std::string slot_name = rest.substr(0, dot);
            std::string field = rest.substr(dot + 1);
            bool known = false;
            for (const char* name : kAllSlots) known = known || slot_name == name;
            if (!known) throw_error(Errc::config_error, "unknown provider slot: " + slot_name);

            auto& slot = config.slots[slot_name];
            if (field == "mode") {
                if (value == "live") slot.mode.kind = providers::ProviderMode::Kind::Live;
                else if (value == "recorded") slot.mode.kind = providers::ProviderMode::Kind::Recorded;
                else throw_error(Errc::config_error, key + " must be live or recorded");
            } else if (field == "fixture_dir") slot.mode.fixture_dir = value;
            else if (field == "strict") slot.mode.strict = to_bool(key, value);
            else if (field == "endpoint") slot.mode.live.url = value;
            else if (field == "api_key_env") slot.mode.live.api_key_env = value;
            else if (field == "rate_limit_per_minute") slot.mode.live.rate_limit_per_minute = static_cast<int>(to_int(key, value));
            else if (field == "max_retries") slot.mode.live.max_retries = static_cast<int>(to_int(key, value));
            else if (field == "initial_backoff_ms") slot.mode.live.initial_backoff_ms = static_cast<int>(to_int(key, value));
            else if (field == "cache_dir") slot.mode.live.cache_dir = value;
            else if (field == "model_tag") slot.model_tag = value;
            else if (field == "dim") slot.embedding_dim = static_cast<std::size_t>(to_int(key, value));
            else throw_error(Errc::config_error, "unknown provider field: " + key);
        } else {
            throw_error(Errc::config_error, "unknown config key: " + key);
        }
    }
    return config;
}

}  // namespace scribe::cli
