#include "kcd/error.hpp"

namespace kcd {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidKeyMaterial: return "InvalidKeyMaterial";
        case Errc::StreamExhausted: return "StreamExhausted";
        case Errc::InvalidRange: return "InvalidRange";
        case Errc::InvalidDimension: return "InvalidDimension";
        case Errc::InvalidGraphSpec: return "InvalidGraphSpec";
        case Errc::InvalidOptions: return "InvalidOptions";
        case Errc::DomainViolation: return "DomainViolation";
        case Errc::NumericalDivergence: return "NumericalDivergence";
        case Errc::ChaosVerificationFailed: return "ChaosVerificationFailed";
        case Errc::IdenticalInputs: return "IdenticalInputs";
        case Errc::InvalidShape: return "InvalidShape";
        case Errc::InvalidInput: return "InvalidInput";
        case Errc::ConfigMismatch: return "ConfigMismatch";
        case Errc::UnsupportedFormat: return "UnsupportedFormat";
        case Errc::CorruptFile: return "CorruptFile";
        case Errc::UnsupportedVersion: return "UnsupportedVersion";
        case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace kcd
