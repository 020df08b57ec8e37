#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "scribe/providers/transport.hpp"

namespace scribe::testing {

// Deterministic in-process provider backend. Chat replies are dispatched on
// the system prompt, searches and page fetches return canned content derived
// from the query, and embeddings are hash-seeded vectors. Driving the full
// pipeline against it (in non-strict recorded mode) is how the bundled
// fixture set is produced.
providers::FunctionTransport::Handler scripted_backend();

// Hash-seeded embedding with values in [-1,1]; identical inputs embed
// identically. `buckets` > 0 coarsens the key so distinct inputs can collide
// into exact ties (useful for exercising tie-break rules).
nlohmann::json scripted_embedding(const std::string& key, std::size_t dim,
                                  std::uint64_t buckets = 0);

}  // namespace scribe::testing
