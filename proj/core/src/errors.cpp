#include "qndcount/errors.hpp"

namespace qndcount {

IntegratorError::IntegratorError(const std::string& what, double residual)
    : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

ParseError::ParseError(const std::string& what, std::size_t line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

}  // namespace qndcount
