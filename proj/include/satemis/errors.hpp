#pragma once

#include <stdexcept>
#include <string>

namespace satemis {

// Process exit codes used by the CLI. Library code throws the typed
// exceptions below; the CLI maps them to these codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitValidation = 2,
    kExitSpeedEstimation = 3,
    kExitLeakageGuard = 4,
};

// Malformed or inconsistent input: parse errors, schema violations,
// broken invariants, missing factor entries.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// The live speed estimator could not produce an estimate (no blob pairs).
// Distinct from ValidationError so callers can fall back to historical speed.
class SpeedEstimationError : public std::runtime_error {
public:
    explicit SpeedEstimationError(const std::string& what) : std::runtime_error(what) {}
};

// Training data contains rows from the reserved test period.
class LeakageError : public std::runtime_error {
public:
    explicit LeakageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace satemis
