#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kds {

enum class ErrorCode {
    empty_scan,
    unreadable_file,
    empty_mask_volume,
    insufficient_samples,
    empty_series,
    invalid_argument,
    io_error,
};

inline constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::empty_scan: return "empty_scan";
    case ErrorCode::unreadable_file: return "unreadable_file";
    case ErrorCode::empty_mask_volume: return "empty_mask_volume";
    case ErrorCode::insufficient_samples: return "insufficient_samples";
    case ErrorCode::empty_series: return "empty_series";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io_error: return "io_error";
    }
    return "unknown";
}

/// Exception carrying one of the library's error codes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace kds
