#include "mbfs/error.hpp"

namespace mbfs {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::dimension_mismatch: return "dimension_mismatch";
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::non_finite: return "non_finite";
        case ErrorKind::insufficient_samples: return "insufficient_samples";
        case ErrorKind::parse_error: return "parse_error";
        case ErrorKind::cyclic_graph: return "cyclic_graph";
    }
    return "unknown";
}

}  // namespace mbfs
