#pragma once

#include <stdexcept>
#include <string>

namespace fso {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Base for failures of an otherwise valid numerical computation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A series coefficient hit a removable pole; the caller should perturb
/// the offending parameter (see ChannelModel::regularized).
class SingularityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Root finder could not establish a sign change.
class BracketError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace fso
