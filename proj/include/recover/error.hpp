#pragma once

#include <stdexcept>
#include <string>

namespace recover {

// Bad user input: malformed files, dangling references, invalid parameters.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problem exceeds the kernel's dense-tableau caps.
class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solution does not carry what an operation needs (missing value, wrong status).
class SolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace recover
