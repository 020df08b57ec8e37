#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>

namespace scribe::providers {

// Injectable time source. Everything that sleeps, stamps, or measures goes
// through one of these so tests and recorded runs stay deterministic.
class Clock {
public:
    virtual ~Clock() = default;

    // Milliseconds since the Unix epoch.
    virtual std::int64_t now_ms() = 0;

    virtual void sleep_for(std::chrono::milliseconds duration) = 0;
};

class SystemClock final : public Clock {
public:
    std::int64_t now_ms() override;
    void sleep_for(std::chrono::milliseconds duration) override;
};

// Starts at a fixed epoch and advances one step per now_ms() call; sleeping
// advances it by the requested amount. Recorded-mode runs use this clock so
// manifests and timestamps are byte-identical across executions.
class TickClock final : public Clock {
public:
    explicit TickClock(std::int64_t start_ms, std::int64_t step_ms = 1)
        : now_(start_ms), step_(step_ms) {}

    std::int64_t now_ms() override { return now_.fetch_add(step_) + step_; }
    void sleep_for(std::chrono::milliseconds duration) override { now_ += duration.count(); }

private:
    std::atomic<std::int64_t> now_;
    std::int64_t step_;
};

// Fully manual clock for unit tests: time moves only when told to.
class ManualClock final : public Clock {
public:
    explicit ManualClock(std::int64_t start_ms = 0) : now_(start_ms) {}

    std::int64_t now_ms() override { return now_.load(); }
    void sleep_for(std::chrono::milliseconds duration) override { now_ += duration.count(); }
    void advance(std::chrono::milliseconds duration) { now_ += duration.count(); }

private:
    std::atomic<std::int64_t> now_;
};

// "YYYY-MM-DDTHH:MM:SSZ" for a Unix-epoch millisecond count.
std::string iso8601_utc(std::int64_t epoch_ms);

}  // namespace scribe::providers
