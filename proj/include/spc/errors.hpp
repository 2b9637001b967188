#pragma once

#include <stdexcept>
#include <string>

namespace spc {

/// Input outside an operation's mathematical domain (bad fraction, a >= b, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file; message carries line/field position.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Well-formed file that violates the documented schema.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested problem exceeds a configured size cap.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace spc
