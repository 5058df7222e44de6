#pragma once

#include <stdexcept>
#include <string>

namespace sr {

// Bad user input: malformed pmf, mismatched alphabet, unknown JSON field, ...
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// The requested distortion target cannot be met even with a perfect
// description of the source (checked with copy auxiliaries).
class InfeasibleTargetError : public std::runtime_error {
public:
    explicit InfeasibleTargetError(const std::string& what) : std::runtime_error(what) {}
};

// A simulation or solver configuration exceeds the desk-scale resource gate.
// what() carries a per-codebook size report.
class CapExceededError : public std::runtime_error {
public:
    explicit CapExceededError(const std::string& what) : std::runtime_error(what) {}
};

// bounds-noncausal operations require X -> Z -> Y degraded side information.
class NonDegradedSourceError : public InputError {
public:
    explicit NonDegradedSourceError(const std::string& what) : InputError(what) {}
};

// The achievable-bound rate expressions assume the aux channel factorizes so
// that W2 and W3 are conditionally independent given (X, W1, V).
class ExtraMarkovViolated : public std::runtime_error {
public:
    explicit ExtraMarkovViolated(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver ran out of iterations before reaching tolerance.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace sr
