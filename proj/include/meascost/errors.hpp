#pragma once

#include <stdexcept>
#include <string>

namespace meascost {

// Base of every error raised by the library. The CLI maps ConfigError to
// exit status 2 and everything else to exit status 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Truncated Fock space discards more probability than the policy allows.
class TailTooHeavy : public Error {
public:
    TailTooHeavy(const std::string& what, double tail_mass)
        : Error(what), tail_mass_(tail_mass) {}
    double tail_mass() const noexcept { return tail_mass_; }

private:
    double tail_mass_;
};

class InvalidState : public Error {
public:
    using Error::Error;
};

class DuplicateLabel : public Error {
public:
    using Error::Error;
};

class UnknownLabel : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class DegenerateData : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace meascost
