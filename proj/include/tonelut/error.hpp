#pragma once

#include <stdexcept>
#include <string>

namespace tonelut {

enum class ErrorCode {
    invalid_argument,
    dimension,
    invalid_coordinates,
    parse,
    format,
    not_found,
    unknown_text,
    version,
    training,
    degenerate_direction,
    io,
    config,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure in the core library is reported as an Error carrying a code
/// that the C API maps onto its status enum.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace tonelut
