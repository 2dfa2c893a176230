#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace divfront {

// Parameter outside the mathematical domain of an operation (t < 0, lambda
// outside (0,1), odd bin count, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Two arguments disagree on support size / length.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Data that cannot be processed (empty sample, out-of-range atom, ...).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A generator whose regularity constants are infinite was handed to a bound.
class UnsupportedFamily : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An experiment configuration field is missing or invalid; field() names it.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& field, const std::string& what)
        : std::invalid_argument("config field '" + field + "': " + what), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace divfront
