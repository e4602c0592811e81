#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sdisc {

// Wrong ambient dimension (odd n, mismatched r, ...).
struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Operand shapes disagree.
struct shape_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct argument_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Non-finite values, division by zero, or a derivative that does not exist.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct singularity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// API used out of order (e.g. backward on an empty tape).
struct state_error : std::logic_error {
  using std::logic_error::logic_error;
};

class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace sdisc
