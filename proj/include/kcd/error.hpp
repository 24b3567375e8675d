#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kcd {

enum class Errc {
    InvalidKeyMaterial,
    StreamExhausted,
    InvalidRange,
    InvalidDimension,
    InvalidGraphSpec,
    InvalidOptions,
    DomainViolation,
    NumericalDivergence,
    ChaosVerificationFailed,
    IdenticalInputs,
    InvalidShape,
    InvalidInput,
    ConfigMismatch,
    UnsupportedFormat,
    CorruptFile,
    UnsupportedVersion,
    IoError,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure the library reports is an Error carrying a typed code.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

class ChaosVerificationError : public Error {
public:
    ChaosVerificationError(double lambda_hat, const std::string& what)
        : Error(Errc::ChaosVerificationFailed, what), lambda_hat_(lambda_hat) {}

    double lambda_hat() const noexcept { return lambda_hat_; }

private:
    double lambda_hat_;
};

}  // namespace kcd
