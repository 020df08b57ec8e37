#include "scribe/providers/request_log.hpp"

#include <algorithm>

namespace scribe::providers {

namespace {
thread_local LogScope::Context g_context{};
}

LogScope::Context& LogScope::current() { return g_context; }

LogScope::LogScope(std::string stage, int stage_ord, int task) : saved_(g_context) {
    g_context = Context{std::move(stage), stage_ord, task, 0};
}

LogScope::~LogScope() { g_context = saved_; }

void RequestLog::record(const std::string& slot, const std::string& kind,
                        const std::string& digest, nlohmann::json request) {
    auto& ctx = LogScope::current();
    RequestLogEntry entry{ctx.stage_ord, ctx.stage, ctx.task, ctx.next_seq++,
                          slot,          kind,      digest,   std::move(request)};
    std::lock_guard lock(mutex_);
    entries_.push_back(std::move(entry));
}

std::vector<RequestLogEntry> RequestLog::sorted_entries() const {
    std::vector<RequestLogEntry> out;
    {
        std::lock_guard lock(mutex_);
        out = entries_;
    }
    std::stable_sort(out.begin(), out.end(), [](const RequestLogEntry& a, const RequestLogEntry& b) {
        if (a.stage_ord != b.stage_ord) return a.stage_ord < b.stage_ord;
        if (a.task != b.task) return a.task < b.task;
        return a.seq < b.seq;
    });
    return out;
}

nlohmann::json RequestLog::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : sorted_entries()) {
        arr.push_back({{"stage", e.stage},
                       {"task", e.task},
                       {"seq", e.seq},
                       {"slot", e.slot},
                       {"kind", e.kind},
                       {"digest", e.digest},
                       {"request", e.request}});
    }
    return arr;
}

std::size_t RequestLog::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

}  // namespace scribe::providers
