#pragma once

#include <stdexcept>
#include <string>

namespace dmri {

// Base for everything thrown by the library. The CLI maps subclasses to
// process exit codes, so new error kinds should derive from one of these.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& msg) : Error(msg) {}
};

struct SingularSystem : Error {
    explicit SingularSystem(const std::string& msg) : Error(msg) {}
};

struct EvenKernel : Error {
    explicit EvenKernel(const std::string& msg) : Error(msg) {}
};

struct TooFewSamples : Error {
    explicit TooFewSamples(const std::string& msg) : Error(msg) {}
};

struct AcsTooSmall : Error {
    explicit AcsTooSmall(const std::string& msg) : Error(msg) {}
};

struct NonFiniteLoss : Error {
    explicit NonFiniteLoss(const std::string& msg) : Error(msg) {}
};

// File format errors (NDA container).
struct BadMagic : Error {
    explicit BadMagic(const std::string& msg) : Error(msg) {}
};

struct TruncatedPayload : Error {
    explicit TruncatedPayload(const std::string& msg) : Error(msg) {}
};

struct UnknownDtype : Error {
    explicit UnknownDtype(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace dmri
