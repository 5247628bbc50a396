#pragma once

#include <stdexcept>
#include <string>

namespace tileforge {

// Machine-readable error categories. The CLI maps them onto exit codes.
enum class ErrorCode {
    invalid_input,   // malformed or inconsistent data
    singular,        // det(M) == 0 where an invertible matrix is needed
    not_expanding,   // some eigenvalue is within tolerance of the unit disc
    overflow,        // 64-bit integer range exceeded
    resource,        // cell/state budget exceeded
    collision,       // sumset is not direct
    no_solution,     // cancellation or decomposition does not exist
    degenerate,      // lower-dimensional point cloud
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace tileforge
