#pragma once

#include <stdexcept>
#include <string>

namespace prion {

/// Raised when a caller breaks a documented precondition (out-of-range size,
/// negative monomer count, mismatched grids, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Invalid parameter values supplied by a user (config files, constructors).
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace prion
