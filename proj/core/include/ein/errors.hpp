#pragma once

#include <stdexcept>
#include <string>

namespace ein {

/// Malformed input files (lexicons, corpora, embeddings, checkpoints).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Inputs that parse but violate a contract (unknown emotion, bad split spec, ...).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad experiment or model configuration, caught before any work starts.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure during training (non-finite loss and friends).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ein
