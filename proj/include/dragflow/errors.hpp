// Error types shared across the solver. Everything user-facing derives from
// Error so the CLI can map failures onto exit codes in one place.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dragflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration, parameters out of range, malformed config text.
struct ConfigError : Error {
    using Error::Error;
};

// An operation was called with inputs violating its contract
// (mixed grids, non-finite values, nonzero mean where zero is required, ...).
struct PreconditionError : Error {
    using Error::Error;
};

// A density dropped below the vacuum floor. Carries the offending value and
// the flat index of the worst cell.
struct VacuumError : Error {
    double min_value;
    std::int64_t index;
    VacuumError(const std::string& msg, double v, std::int64_t i)
        : Error(msg), min_value(v), index(i) {}
};

// The time integration failed: step size underflow or non-finite fields.
// `time` is the last time at which the state was still valid.
struct BlowupError : Error {
    double time;
    BlowupError(const std::string& msg, double t) : Error(msg), time(t) {}
};

}  // namespace dragflow
