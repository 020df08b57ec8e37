#include "scribe/providers/digest.hpp"

#include <openssl/sha.h>

#include <array>

#include <nlohmann/json.hpp>

namespace scribe::providers {

std::string sha256_hex(const std::string& data) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> hash{};
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), hash.data());
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(hash.size() * 2);
    for (unsigned char byte : hash) {
        out.push_back(hex[byte >> 4]);
        out.push_back(hex[byte & 0xf]);
    }
    return out;
}

std::string request_digest(const std::string& kind, const nlohmann::json& request) {
    // nlohmann::json objects iterate in key order, so dump() is canonical.
    return sha256_hex(kind + "\n" + request.dump());
}

}  // namespace scribe::providers
