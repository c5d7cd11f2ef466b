#include "vimu/error.hpp"

namespace vimu {

FormatError::FormatError(const std::string& what, std::size_t line)
    : Error(ErrorKind::format, "line " + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace vimu
