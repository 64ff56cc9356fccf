#include "memchua/error.hpp"

namespace memchua {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::underdetermined: return "underdetermined";
    case ErrorKind::singular: return "singular";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::safe_window: return "safe-window";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::parse: return "parse";
    }
    return "unknown";
}

}  // namespace memchua
