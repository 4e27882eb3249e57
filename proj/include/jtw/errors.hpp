#pragma once

#include <stdexcept>
#include <string>

namespace jtw {

// Shape mismatches, invalid hyperparameters, malformed inputs.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// API misuse, e.g. calling backward on a non-scalar node.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// A NaN or Inf appeared in a computation.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Lookup of a token that is not in the vocabulary.
class OovError : public std::runtime_error {
public:
    explicit OovError(const std::string& token)
        : std::runtime_error("out-of-vocabulary token: '" + token + "'"), token_(token) {}
    const std::string& token() const noexcept { return token_; }

private:
    std::string token_;
};

}  // namespace jtw
