#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace idrank {

enum class ErrorCode {
    TooFewPoints,
    NonFiniteInput,
    DegenerateInput,
    InvalidRatio,
    InvalidArgument,
    InvalidSpec,
    FormatError,
    DimensionMismatch,
    LengthMismatch,
    ZeroRank,
    ShapeMismatch,
    IoError,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries a stable machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view code_name() const { return error_code_name(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace idrank
