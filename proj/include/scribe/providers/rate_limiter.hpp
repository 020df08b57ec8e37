#pragma once

#include <deque>
#include <memory>
#include <mutex>

#include "scribe/providers/clock.hpp"

namespace scribe::providers {

// Sliding-window limiter: at most `per_minute` acquisitions in any 60-second
// window. acquire() blocks (via the injected clock) until a slot frees up.
// Thread-safe; token acquisition is serialized.
class RateLimiter {
public:
    RateLimiter(int per_minute, std::shared_ptr<Clock> clock);

    void acquire();

    int per_minute() const { return per_minute_; }

private:
    int per_minute_;
    std::shared_ptr<Clock> clock_;
    std::mutex mutex_;
    std::deque<std::int64_t> issued_;  // timestamps of grants inside the window
};

}  // namespace scribe::providers
