#pragma once

#include <stdexcept>
#include <string>

namespace chshforge {

// Bad identifiers, out-of-range arguments, violated preconditions.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Input text that does not match the documented schema.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A CHSH value escaped [-2, 2] on a model that validated. Every local
// model is a convex mixture of per-point values in {-2, +2}, so this is
// either a numerical defect or a broken theorem; callers treat it as a
// falsification signal, never as a recoverable condition.
class BoundViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace chshforge
