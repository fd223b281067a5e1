#pragma once

#include <stdexcept>
#include <string>

namespace hcim {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed configuration or command-line usage (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Problems with input data: files, networks, parameters (CLI exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

/// Syntactic problem in an input file; carries the 1-based line number.
class ParseError : public DataError {
public:
    ParseError(const std::string& msg, long line)
        : DataError(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

/// Semantic violation of a documented invariant or precondition.
class ValidationError : public DataError {
public:
    using DataError::DataError;
};

/// The linear system has an interior node that cannot reach any boundary
/// node, so (I - R) is singular. Reports one such trapped node.
class SingularSystemError : public DataError {
public:
    SingularSystemError(const std::string& msg, long long trapped_node)
        : DataError(msg), trapped_node_(trapped_node) {}
    long long trapped_node() const { return trapped_node_; }

private:
    long long trapped_node_;
};

/// Requested problem size exceeds a configured or physical limit
/// (CLI exit code 4).
class CapacityError : public Error {
public:
    using Error::Error;
};

} // namespace hcim
