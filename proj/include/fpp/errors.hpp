#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fpp {

/// Invalid user-supplied parameters (bad rate, malformed config, ...).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A query outside the domain of an object (vertex outside a box, non-adjacent edge, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Failure while reading a persisted artifact.
struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A probability-zero event under the continuous-weight model was observed,
/// e.g. two edge weights compared equal.
struct ModelViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A per-replica invariant check failed. Carries the replica seed for replay.
struct AssertionFailure : std::runtime_error {
    AssertionFailure(const std::string& what, std::uint64_t replica_seed = 0)
        : std::runtime_error(what), seed(replica_seed) {}
    std::uint64_t seed;
};

}  // namespace fpp
