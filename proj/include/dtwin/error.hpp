#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dtwin {

enum class ErrorCode {
    parse,
    invalid_argument,
    unknown_material,
    non_planar,
    invalid_scene,
    coincident_endpoints,
    self_loop,
    unknown_node,
    out_of_range,
    power_budget,
    shape_mismatch,
    missing_channel,
    zero_channel,
    bin_mismatch,
    unknown_ap,
    stale_database,
    malformed_topic,
    io,
    config,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; the code is stable and machine readable.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace dtwin
