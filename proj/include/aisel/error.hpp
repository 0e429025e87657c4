#ifndef AISEL_ERROR_HPP
#define AISEL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace aisel {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension or shape disagreement between operands.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error("shape error: " + what) {}
};

/// A value violates an operation's precondition.
class ArgumentError : public Error {
public:
    explicit ArgumentError(const std::string& what) : Error("invalid argument: " + what) {}
};

/// NaN or Inf produced where finite values are required.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error("numeric error: " + what) {}
};

/// Malformed file, checkpoint, or wire message.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error("format error: " + what) {}
};

/// Invalid or unknown configuration entries. The CLI maps these to exit code 2.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

/// Failure of an external labeling process.
class OracleError : public Error {
public:
    explicit OracleError(const std::string& what) : Error("oracle error: " + what) {}
};

} // namespace aisel

#endif
