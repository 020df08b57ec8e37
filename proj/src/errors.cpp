#include "scribe/errors.hpp"

namespace scribe {

std::string_view errc_name(Errc code) {
    switch (code) {
        case Errc::empty_topic: return "EmptyTopic";
        case Errc::empty_text: return "EmptyText";
        case Errc::invalid_article: return "InvalidArticle";
        case Errc::fixture_miss: return "FixtureMiss";
        case Errc::rate_limited: return "RateLimited";
        case Errc::transport_error: return "TransportError";
        case Errc::quota_exceeded: return "QuotaExceeded";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::zero_vector: return "ZeroVector";
        case Errc::empty_brief: return "EmptyBrief";
        case Errc::outline_parse_error: return "OutlineParseError";
        case Errc::persona_parse_error: return "PersonaParseError";
        case Errc::exploration_dead_end: return "ExplorationDeadEnd";
        case Errc::feedback_parse_error: return "FeedbackParseError";
        case Errc::notes_parse_error: return "NotesParseError";
        case Errc::draft_parse_error: return "DraftParseError";
        case Errc::dangling_citation: return "DanglingCitation";
        case Errc::placement_parse_error: return "PlacementParseError";
        case Errc::empty_candidates: return "EmptyCandidates";
        case Errc::all_embeddings_failed: return "AllEmbeddingsFailed";
        case Errc::score_parse_error: return "ScoreParseError";
        case Errc::no_images: return "NoImages";
        case Errc::missing_criterion: return "MissingCriterion";
        case Errc::invalid_argument: return "InvalidArgument";
        case Errc::config_error: return "ConfigError";
        case Errc::io_error: return "IoError";
    }
    return "UnknownError";
}

}  // namespace scribe
