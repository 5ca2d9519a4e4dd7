#pragma once

#include <stdexcept>
#include <string>

namespace umdp {

enum class ErrorKind {
    MisalignedRegion,
    IndivisibleBlocks,
    ParseError,
    DimensionMismatch,
    InsufficientSamples,
    InfeasibleGamma,
    NondeterministicEdge,
    IncompleteTransition,
    UnknownProposition,
    LpInfeasible,
    NoConvergence,
    InvalidArgument,
    ConfigError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::MisalignedRegion: return "MisalignedRegion";
    case ErrorKind::IndivisibleBlocks: return "IndivisibleBlocks";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::InfeasibleGamma: return "InfeasibleGamma";
    case ErrorKind::NondeterministicEdge: return "NondeterministicEdge";
    case ErrorKind::IncompleteTransition: return "IncompleteTransition";
    case ErrorKind::UnknownProposition: return "UnknownProposition";
    case ErrorKind::LpInfeasible: return "LpInfeasible";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Error";
}

} // namespace umdp
