#pragma once

#include <stdexcept>
#include <string>

namespace eqmin {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class NonFinite : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoCrossing : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BracketNotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RungToleranceExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class JunctionMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AlreadyAssembled : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class DegenerateTangency : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class S1NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProbeInconclusive : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace eqmin
