#include "pfmm/error.hpp"

namespace pfmm {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid road network";
  for (const auto& p : problems) {
    out += "\n  - ";
    out += p;
  }
  return out;
}

}  // namespace

NetworkError::NetworkError(std::vector<std::string> problems)
    : Error(join_problems(problems)), problems_(std::move(problems)) {}

}  // namespace pfmm
