#include "mick/error.hpp"

namespace mick {

std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::InvalidDensity: return "InvalidDensity";
    case Errc::NonInvertible: return "NonInvertible";
    case Errc::ZeroTau: return "ZeroTau";
    case Errc::NonPositiveDensity: return "NonPositiveDensity";
    case Errc::NotConverged: return "NotConverged";
    case Errc::DivergenceDetected: return "DivergenceDetected";
    case Errc::TauInfeasible: return "TauInfeasible";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::BracketFailure: return "BracketFailure";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::ParseError: return "ParseError";
    }
    return "Unknown";
}

} // namespace mick
