#pragma once

#include <stdexcept>
#include <string>

namespace pridetect {

// Problems that originate in user-supplied input: malformed files, invalid
// configuration values, broken data preconditions (empty corpora, missing
// topics, ...). The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parse failure in a structured text file. Carries the 1-based line number of
// the offending line; the formatted message includes it.
class ParseError : public ConfigError {
public:
    ParseError(const std::string& message, int line)
        : ConfigError(message + " (line " + std::to_string(line) + ")"), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

// Caller passed an out-of-domain argument: smoothing weight outside [0, 1),
// zero prior in a ratio, empty score list, and the like.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An API usage rule was broken: clicking an item that was never served,
// clicking a probe page, scoring against stats of the wrong shape.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Filesystem-level failure (unreadable file, unwritable output directory).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pridetect
