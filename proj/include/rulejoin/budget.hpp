#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>

namespace rulejoin {

class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

// Optional wall-clock limit shared by the long-running stages.
struct Deadline {
    std::optional<Clock::time_point> at;

    static Deadline after(double seconds) {
        return {Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds))};
    }
    bool expired() const { return at && Clock::now() > *at; }
    void check(const char* where) const {
        if (expired()) throw BudgetExceeded(where);
    }
};

} // namespace rulejoin
