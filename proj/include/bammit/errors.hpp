#pragma once

#include <stdexcept>
#include <string>

namespace bammit {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class IndexError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A transform received an input for which it is undefined
/// (e.g. a constant vector fed to the zero-sum/unit-norm normalization).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

class LayoutMismatch : public Error {
public:
    using Error::Error;
};

class IncompleteTable : public Error {
public:
    using Error::Error;
};

class MissingColumn : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t row, const std::string& msg)
        : Error("row " + std::to_string(row) + ": " + msg), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

class EmptyFile : public Error {
public:
    using Error::Error;
};

class EmptyData : public Error {
public:
    using Error::Error;
};

/// A sampler parameter became NaN or infinite; carries the iteration index.
class NonFiniteState : public Error {
public:
    NonFiniteState(int iteration, const std::string& what_param)
        : Error("non-finite state at iteration " + std::to_string(iteration) +
                " (" + what_param + ")"),
          iteration_(iteration) {}
    int iteration() const { return iteration_; }

private:
    int iteration_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class VersionMismatch : public Error {
public:
    using Error::Error;
};

class CorruptRecord : public Error {
public:
    CorruptRecord(std::size_t line, const std::string& msg)
        : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

}  // namespace bammit
