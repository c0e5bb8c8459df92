#pragma once

#include <stdexcept>
#include <string>

namespace goaltm {

// Error taxonomy shared across the library. The CLI maps these onto exit
// codes: input/config problems -> 2, provider/transport problems -> 3,
// everything else (broken invariants, corrupt artifacts) -> 4.

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Math-level precondition violations (zero vectors, off-simplex inputs, ...).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Network / process-level failure after retries are exhausted.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Provider answered, but the payload content is unusable (wrong phrase
// count, empty rewrite, ...).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Provider answered with a structurally wrong payload (bad JSON shape,
// wrong embedding dimension, ...).
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CacheError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Persisted artifact fails its integrity checks (digest mismatch, truncation).
struct CorruptionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace goaltm
