#include "dtwin/error.hpp"

namespace dtwin {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::parse: return "parse";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::unknown_material: return "unknown_material";
        case ErrorCode::non_planar: return "non_planar";
        case ErrorCode::invalid_scene: return "invalid_scene";
        case ErrorCode::coincident_endpoints: return "coincident_endpoints";
        case ErrorCode::self_loop: return "self_loop";
        case ErrorCode::unknown_node: return "unknown_node";
        case ErrorCode::out_of_range: return "out_of_range";
        case ErrorCode::power_budget: return "power_budget";
        case ErrorCode::shape_mismatch: return "shape_mismatch";
        case ErrorCode::missing_channel: return "missing_channel";
        case ErrorCode::zero_channel: return "zero_channel";
        case ErrorCode::bin_mismatch: return "bin_mismatch";
        case ErrorCode::unknown_ap: return "unknown_ap";
        case ErrorCode::stale_database: return "stale_database";
        case ErrorCode::malformed_topic: return "malformed_topic";
        case ErrorCode::io: return "io";
        case ErrorCode::config: return "config";
    }
    return "unknown";
}

}  // namespace dtwin
