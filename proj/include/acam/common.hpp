#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace acam {

inline constexpr double kLn10 = 2.302585092994045684;

/// Root finder failed to bracket or converge on a solution.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A requested dynamic-range target cannot be reached; carries the best
/// separation actually achieved so callers can report it.
struct DrUnreachable : std::runtime_error {
    double achieved;
    explicit DrUnreachable(double achieved_dr)
        : std::runtime_error("dynamic-range target unreachable, achieved " +
                             std::to_string(achieved_dr) + " V"),
          achieved(achieved_dr) {}
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace acam
