#pragma once

#include <stdexcept>
#include <string>

namespace rankminer {

// Root of all library errors. The CLI maps IoError to exit code 2 and
// every other Error to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Input that violates an operation's precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

class EmptyCorpusError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NotObservedError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class OovError : public ValidationError {
public:
    explicit OovError(const std::string& token)
        : ValidationError("out-of-vocabulary token: '" + token + "'"), token_(token) {}
    const std::string& token() const noexcept { return token_; }

private:
    std::string token_;
};

class DegenerateSampleError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// A pipeline stage was run before the stage that produces its input.
class DependencyError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

} // namespace rankminer
