#ifndef SPECMATCH_ERRORS_HPP
#define SPECMATCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace specmatch {

// Thrown when input data fails structural validation (dimensions, signs,
// malformed files). Maps to a usage/validation exit code at the CLI.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// An auction loop exceeded its round cap without settling.
class IterationCapExceeded : public std::runtime_error {
 public:
  explicit IterationCapExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Exhaustive enumeration requested on a market beyond the supported size.
class InstanceTooLarge : public std::runtime_error {
 public:
  explicit InstanceTooLarge(const std::string& what) : std::runtime_error(what) {}
};

// Lattice merge invoked on matchings with different assignments.
class AssignmentMismatch : public std::runtime_error {
 public:
  explicit AssignmentMismatch(const std::string& what) : std::runtime_error(what) {}
};

class EmptyInput : public std::runtime_error {
 public:
  explicit EmptyInput(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace specmatch

#endif
