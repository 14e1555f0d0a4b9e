#ifndef LFIV_ERROR_HPP
#define LFIV_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lfiv {

/// Failure category. The CLI maps each category to its own exit code.
enum class ErrorKind { config, data, numerical };

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

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::string field, const std::string& what)
        : Error(ErrorKind::data, what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class NonFiniteValue : public Error {
public:
    NonFiniteValue(std::string field, long row)
        : Error(ErrorKind::data, "non-finite value in " + field + " at row " + std::to_string(row)),
          field_(std::move(field)), row_(row) {}
    const std::string& field() const noexcept { return field_; }
    long row() const noexcept { return row_; }

private:
    std::string field_;
    long row_;
};

class DegenerateSample : public Error {
public:
    explicit DegenerateSample(const std::string& what) : Error(ErrorKind::data, what) {}
};

class IterationDivergence : public Error {
public:
    IterationDivergence(long iteration, const std::string& what)
        : Error(ErrorKind::numerical, what), iteration_(iteration) {}
    long iteration() const noexcept { return iteration_; }

private:
    long iteration_;
};

class SingularSigma : public Error {
public:
    explicit SingularSigma(double condition)
        : Error(ErrorKind::numerical, "singular Sigma-hat (condition number " + std::to_string(condition) + ")"),
          condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::data: return "data";
    case ErrorKind::numerical: return "numerical";
    }
    return "unknown";
}

} // namespace lfiv

#endif
