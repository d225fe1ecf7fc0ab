#pragma once

#include <stdexcept>
#include <string>

namespace memnav {

// A MapSpec that cannot be rasterized (start or goal blocked, off-grid).
class InfeasibleSpec : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A* exhausted the open set without reaching the goal region.
class NoPath : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One-vs-all relabeling left only one class.
class DegenerateData : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A named input file is missing or unreadable.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace memnav
