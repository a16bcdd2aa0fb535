#pragma once

#include <stdexcept>
#include <string>

namespace tml {

// Index or argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Malformed request: bad parameters, mismatched lists, wrong family.
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// The computation ran but a hypothesis it depends on could not be established.
struct Refusal : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tml
