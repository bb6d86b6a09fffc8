#pragma once

#include <stdexcept>
#include <string>

namespace uicrop {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Geometry / raster contract violations.
struct OutOfBoundsError : Error { using Error::Error; };
struct InvalidTargetError : Error { using Error::Error; };
struct InvalidSigmaError : Error { using Error::Error; };
struct TooSmallError : Error { using Error::Error; };
struct BadThresholdsError : Error { using Error::Error; };
struct DegenerateBoxError : Error { using Error::Error; };

// Synthesis / annotation.
struct PlacementFailureError : Error { using Error::Error; };
struct AgentError : Error { using Error::Error; };
struct UnknownDescriptionError : AgentError { using AgentError::AgentError; };
struct AugmenterError : Error { using Error::Error; };

// Tooling. Exit-code mapping in the CLI: IoError=2, DecodeError=3,
// ProtocolError=4, ConfigError=5.
struct IoError : Error { using Error::Error; };
struct DecodeError : Error { using Error::Error; };
struct ProtocolError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace uicrop
