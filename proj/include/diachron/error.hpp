#pragma once

#include <stdexcept>
#include <string>

namespace diachron {

// Every failure the library reports is a diachron::Error; the CLI turns it
// into a JSON error line and a nonzero exit code.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace diachron
