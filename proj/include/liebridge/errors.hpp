#pragma once

#include <stdexcept>
#include <string>

namespace liebridge {

// Rotation at (or numerically indistinguishable from) angle pi: no principal logarithm.
class CutLocusError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class NotSPDError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Guiding term requested at or beyond the bridge horizon.
class HorizonError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Every importance weight underflowed or was non-finite.
class DegenerateWeights : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonFiniteLikelihood : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace liebridge
