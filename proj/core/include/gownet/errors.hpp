#pragma once

#include <stdexcept>
#include <string>

namespace gownet {

// Dimension or shape mismatch between operands.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Out-of-range, duplicate, or non-ascending index selection.
struct IndexError : std::runtime_error {
  explicit IndexError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration value (window size, k, kernel width, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file contents.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / stream failure.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Graph with no usable nodes (all padded, zero-degree without self-loop, ...).
struct DegenerateGraphError : std::runtime_error {
  explicit DegenerateGraphError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure during training (NaN gradients and the like).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gownet
