#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace scribe::providers {

// One line per provider call. Entries carry an orchestration key
// (stage ordinal, task ordinal, per-task sequence) so the persisted log is
// deterministic even when tasks inside a stage run concurrently.
struct RequestLogEntry {
    int stage_ord = 0;
    std::string stage;
    int task = 0;
    int seq = 0;
    std::string slot;
    std::string kind;
    std::string digest;
    nlohmann::json request;
};

class RequestLog {
public:
    void record(const std::string& slot, const std::string& kind, const std::string& digest,
                nlohmann::json request);

    // Entries sorted by (stage_ord, task, seq); safe to call mid-run.
    std::vector<RequestLogEntry> sorted_entries() const;

    nlohmann::json to_json() const;

    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::vector<RequestLogEntry> entries_;
};

// RAII label for the current thread's orchestration position. Each scope
// restarts the per-task sequence counter; provider calls made while a scope
// is alive inherit its (stage, task) key.
class LogScope {
public:
    LogScope(std::string stage, int stage_ord, int task = 0);
    ~LogScope();

    LogScope(const LogScope&) = delete;
    LogScope& operator=(const LogScope&) = delete;

    struct Context {
        std::string stage;
        int stage_ord = 0;
        int task = 0;
        int next_seq = 0;
    };

    static Context& current();

private:
    Context saved_;
};

}  // namespace scribe::providers
