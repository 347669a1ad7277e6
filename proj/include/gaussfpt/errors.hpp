#pragma once

#include <stdexcept>
#include <string>

namespace gaussfpt {

/// Coarse failure classes; the CLI maps them onto process exit codes.
enum class ErrorKind {
    config,            ///< invalid user input or violated model precondition
    numerical,         ///< quadrature / embedding could not meet its tolerance
    insufficient_data  ///< not enough simulated mass to estimate something
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// The covariance model breaks one of gamma(0)=1, gamma'(0)=0, gamma''(0)<0 or the decay conditions.
class AssumptionViolation : public Error {
public:
    explicit AssumptionViolation(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// A boundary does not satisfy the limit hypotheses needed by the asymptotic results.
class HypothesisViolation : public Error {
public:
    explicit HypothesisViolation(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DegenerateTimes : public Error {
public:
    explicit DegenerateTimes(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class QuadratureNotConverged : public Error {
public:
    explicit QuadratureNotConverged(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class EmbeddingFailure : public Error {
public:
    explicit EmbeddingFailure(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class InsufficientPaths : public Error {
public:
    explicit InsufficientPaths(const std::string& what)
        : Error(ErrorKind::insufficient_data, what) {}
};

class InsufficientData : public Error {
public:
    explicit InsufficientData(const std::string& what)
        : Error(ErrorKind::insufficient_data, what) {}
};

}  // namespace gaussfpt
