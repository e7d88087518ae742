#pragma once

#include <stdexcept>
#include <string>

namespace dualcycle {

// Raised when encoding hits a zero-sigma step whose residual cannot be
// represented in the latent code (only possible with eta = 0).
struct EncodeSingularityError : std::runtime_error {
  explicit EncodeSingularityError(const std::string& what) : std::runtime_error(what) {}
};

// Raised for attribute names or values outside the active vocabulary.
struct VocabularyError : std::invalid_argument {
  explicit VocabularyError(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when a world cannot be assembled into a valid mixture.
struct WorldConstructionError : std::runtime_error {
  explicit WorldConstructionError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a condition leaves no component with positive weight.
struct UnsatisfiableConditionError : std::runtime_error {
  explicit UnsatisfiableConditionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dualcycle
