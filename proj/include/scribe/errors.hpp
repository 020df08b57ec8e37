#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scribe {

// Every failure the engine can surface, across all modules. Tests match on
// the code, messages are for humans.
enum class Errc {
    // core
    empty_topic,
    empty_text,
    invalid_article,
    // providers
    fixture_miss,
    rate_limited,
    transport_error,
    quota_exceeded,
    dimension_mismatch,
    zero_vector,
    // outline
    empty_brief,
    outline_parse_error,
    // exploration
    persona_parse_error,
    exploration_dead_end,
    // reflection
    feedback_parse_error,
    // composer
    notes_parse_error,
    draft_parse_error,
    dangling_citation,
    // visual
    placement_parse_error,
    empty_candidates,
    all_embeddings_failed,
    // evalbench
    score_parse_error,
    no_images,
    missing_criterion,
    // cli / misc
    invalid_argument,
    config_error,
    io_error,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void throw_error(Errc code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace scribe
