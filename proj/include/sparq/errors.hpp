#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sparq {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ingest
struct MalformedRecord : Error {
    std::size_t line = 0;
    MalformedRecord(std::size_t line_no, const std::string& why)
        : Error("malformed record at line " + std::to_string(line_no) + ": " + why),
          line(line_no) {}
};

struct DuplicateTimestamp : Error {
    std::int64_t timestamp = 0;
    explicit DuplicateTimestamp(std::int64_t t)
        : Error("duplicate timestamp " + std::to_string(t)), timestamp(t) {}
};

struct EmptyInput : Error {
    EmptyInput() : Error("input contains no records") {}
    explicit EmptyInput(const std::string& what) : Error(what) {}
};

struct InsufficientOverlap : Error {
    using Error::Error;
};

// preprocess
struct EmptyInterval : Error {
    EmptyInterval() : Error("time interval is empty") {}
};

struct NyquistViolation : Error {
    using Error::Error;
};

// recurrence / metrics
struct LengthMismatch : Error {
    using Error::Error;
};

struct GridMisaligned : Error {
    using Error::Error;
};

struct SizeMismatch : Error {
    using Error::Error;
};

struct EmptyList : Error {
    EmptyList() : Error("list must be non-empty") {}
};

struct InvalidLMin : Error {
    explicit InvalidLMin(std::int64_t v)
        : Error("l_min must be >= 1, got " + std::to_string(v)) {}
};

// risk
struct InvalidPolicy : Error {
    using Error::Error;
};

// store
struct Unauthorized : Error {
    Unauthorized() : Error("credential does not match the pool secret") {}
};

struct NotFound : Error {
    using Error::Error;
};

struct ConfigMismatch : Error {
    using Error::Error;
};

// serialization
struct MalformedContainer : Error {
    using Error::Error;
};

// testkit
struct UnrealizableSpec : Error {
    using Error::Error;
};

}  // namespace sparq
