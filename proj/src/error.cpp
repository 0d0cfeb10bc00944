#include "qextrap/error.hpp"

namespace qextrap {

namespace {
std::string join(const std::vector<std::string>& parts) {
  std::string out = "validation failed";
  for (const auto& p : parts) out += "; " + p;
  return out;
}
}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(join(violations)), violations_(std::move(violations)) {}

}  // namespace qextrap
