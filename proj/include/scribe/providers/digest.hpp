#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

namespace scribe::providers {

// SHA-256 hex of arbitrary bytes.
std::string sha256_hex(const std::string& data);

// Content address of a provider request: SHA-256 over the request kind plus
// the canonical JSON serialization (sorted keys, compact). Semantically equal
// requests digest identically regardless of original field order; this digest
// keys both fixtures and the live-response cache.
std::string request_digest(const std::string& kind, const nlohmann::json& request);

}  // namespace scribe::providers
