#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wpb {

enum class ErrorCode {
    InvalidArgument,
    InvalidDistribution,
    UnboundedSupport,
    DomainError,
    DegenerateCosts,
    NonzeroSatisfaction,
    NoRootInRange,
    PolicyUnresolvable,
    ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidDistribution: return "InvalidDistribution";
        case ErrorCode::UnboundedSupport: return "UnboundedSupport";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::DegenerateCosts: return "DegenerateCosts";
        case ErrorCode::NonzeroSatisfaction: return "NonzeroSatisfaction";
        case ErrorCode::NoRootInRange: return "NoRootInRange";
        case ErrorCode::PolicyUnresolvable: return "PolicyUnresolvable";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

/// Single exception type for the library; the code lets callers (and the CLI
/// exit-status mapping) branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// True for errors caused by the model itself rather than by malformed input.
constexpr bool is_domain_error(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DegenerateCosts:
        case ErrorCode::NonzeroSatisfaction:
        case ErrorCode::NoRootInRange:
        case ErrorCode::PolicyUnresolvable:
        case ErrorCode::DomainError:
            return true;
        default:
            return false;
    }
}

}  // namespace wpb
