#include "scribe/providers/rate_limiter.hpp"

#include "scribe/errors.hpp"

namespace scribe::providers {

namespace {
constexpr std::int64_t kWindowMs = 60'000;
}

RateLimiter::RateLimiter(int per_minute, std::shared_ptr<Clock> clock)
    : per_minute_(per_minute), clock_(std::move(clock)) {
    if (per_minute_ < 1) {
        throw_error(Errc::invalid_argument, "rate limit must be at least 1 request/minute");
    }
}

void RateLimiter::acquire() {
    for (;;) {
        std::int64_t wait_ms = 0;
        {
            std::lock_guard lock(mutex_);
            std::int64_t now = clock_->now_ms();
            while (!issued_.empty() && issued_.front() <= now - kWindowMs) {
                issued_.pop_front();
            }
            if (static_cast<int>(issued_.size()) < per_minute_) {
                issued_.push_back(now);
                return;
            }
            wait_ms = issued_.front() + kWindowMs - now;
        }
        clock_->sleep_for(std::chrono::milliseconds(wait_ms > 0 ? wait_ms : 1));
    }
}

}  // namespace scribe::providers
