#include "orbitpose/errors.hpp"

namespace orbitpose {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

TrainingDivergence::TrainingDivergence(long step, const std::string& what)
    : Error("training diverged at step " + std::to_string(step) + ": " + what), step_(step) {}

}  // namespace orbitpose
