#pragma once

#include <stdexcept>
#include <string>

namespace latmap {

// Input text that is not syntactically valid (rationals, JSON documents).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally well-formed input that violates a semantic rule of the file
// format or of a family (bad face indices, out-of-range degrees, ...).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Substitution hit a variable with no assigned image.
struct MissingAssignment : std::runtime_error {
  explicit MissingAssignment(const std::string& what) : std::runtime_error(what) {}
};

// Numeric evaluation left the domain of a closed-form map (square-root
// argument not positive, vanishing denominator, near-singular state).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// A family was handed to a routine that expects the other quadratic branch.
struct BranchMismatch : std::runtime_error {
  explicit BranchMismatch(const std::string& what) : std::runtime_error(what) {}
};

// Gauge normalization found a face whose two shift directions disagree on the
// slice coefficient; no point gauge can remove the slice for such a family.
struct NormalFormError : std::runtime_error {
  explicit NormalFormError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace latmap
