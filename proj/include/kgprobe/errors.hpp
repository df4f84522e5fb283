#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgprobe {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input data violates a structural contract (missing field, bad grammar, ...).
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message)
        : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Network or backend failure that may succeed on retry.
class TransportError : public Error {
public:
    TransportError(const std::string& message, int attempts)
        : Error(message + " (after " + std::to_string(attempts) + " attempt(s))"), detail_(message), attempts_(attempts) {}

    int attempts() const noexcept { return attempts_; }
    // The message without the attempt count.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    int attempts_;
};

// Backend answered but the payload could not be interpreted.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::string raw_body)
        : Error(message), raw_body_(std::move(raw_body)) {}

    const std::string& raw_body() const noexcept { return raw_body_; }

private:
    std::string raw_body_;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, double last_delta)
        : Error(message + " (last delta " + std::to_string(last_delta) + ")"), last_delta_(last_delta) {}

    double last_delta() const noexcept { return last_delta_; }

private:
    double last_delta_;
};

// Text has no content words, so no embedding can be formed.
class UnembeddableError : public Error {
public:
    UnembeddableError() : Error("unembeddable: text has no content words") {}
};

}  // namespace kgprobe
