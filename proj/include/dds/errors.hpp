#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dds {

// Base class for all recoverable errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A physiological or geometric value fell outside its allowed range.
class RangeError : public Error {
public:
    RangeError(std::string field, double value, double lo, double hi)
        : Error("value out of range: " + field + "=" + std::to_string(value) +
                " allowed [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"),
          field(std::move(field)), value(value), lo(lo), hi(hi) {}

    std::string field;
    double value;
    double lo;
    double hi;
};

// Malformed input line (replay files, payloads).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : Error("parse error at line " + std::to_string(line) + ": " + reason),
          line(line), reason(reason) {}

    std::size_t line;
    std::string reason;
};

// Timestamps regressed within a stream that must be time-ordered.
class OrderError : public Error {
public:
    explicit OrderError(std::size_t line)
        : Error("timestamp regression at line " + std::to_string(line)), line(line) {}
    OrderError(std::int64_t t_ms, std::int64_t prev_ms)
        : Error("timestamp regression: t=" + std::to_string(t_ms) +
                " after t=" + std::to_string(prev_ms)),
          line(0) {}

    std::size_t line;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("bad config: " + what) {}
};

class InvalidScenario : public Error {
public:
    explicit InvalidScenario(const std::string& what) : Error("invalid scenario: " + what) {}
};

class InsufficientData : public Error {
public:
    explicit InsufficientData(const std::string& what) : Error("insufficient data: " + what) {}
};

class ModeError : public Error {
public:
    explicit ModeError(const std::string& what) : Error("mode error: " + what) {}
};

// Authentication failure: wrong key or tampered ciphertext. For record files
// seq carries the index of the first chunk that failed to verify.
class AuthError : public Error {
public:
    explicit AuthError(const std::string& what) : Error("auth error: " + what), seq(-1) {}
    AuthError(std::int64_t seq, const std::string& what)
        : Error("auth error at chunk " + std::to_string(seq) + ": " + what), seq(seq) {}

    std::int64_t seq;
};

class WeakParams : public Error {
public:
    explicit WeakParams(const std::string& what) : Error("weak kdf params: " + what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("i/o error: " + what) {}
};

class NotFound : public Error {
public:
    explicit NotFound(const std::string& what) : Error("not found: " + what) {}
};

class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& what) : Error("protocol error: " + what) {}
};

class ClosedSession : public Error {
public:
    explicit ClosedSession(const std::string& what) : Error("session closed: " + what) {}
};

} // namespace dds
