#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mick {

enum class Errc {
    InvalidArgument,
    OutOfRange,
    InvalidDensity,
    NonInvertible,
    ZeroTau,
    NonPositiveDensity,
    NotConverged,
    DivergenceDetected,
    TauInfeasible,
    NoConvergence,
    BracketFailure,
    GridMismatch,
    ParseError,
};

std::string_view to_string(Errc code) noexcept;

//! Base exception for every failure raised by the library. The code is
//! stable and is what the CLI prints in its machine-readable error line.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace mick
