#pragma once

#include <stdexcept>
#include <string>

namespace phigamma {

struct ParseError : std::runtime_error {
  std::size_t pos;
  ParseError(const std::string& msg, std::size_t at)
      : std::runtime_error(msg + " (at position " + std::to_string(at) + ")"), pos(at) {}
};

}  // namespace phigamma
