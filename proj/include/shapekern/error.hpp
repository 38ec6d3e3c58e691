#pragma once

#include <stdexcept>
#include <string>

namespace shapekern {

/// Raised when a kernel or Gram computation produces non-finite values or an
/// eigendecomposition fails.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested derivative order exceeds what the kernel supports.
class OrderError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace shapekern
