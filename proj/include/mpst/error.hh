#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpst {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// A structurally invalid artifact (bad machine, bad equation set, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Exploration exceeded its configured node cap.
class ResourceLimit : public Error {
public:
    using Error::Error;
};

class MergeFailure : public Error {
public:
    MergeFailure(std::vector<std::string> path, std::string left, std::string right)
        : Error(describe(path, left, right)), path_(std::move(path)),
          left_(std::move(left)), right_(std::move(right)) {}

    const std::vector<std::string>& path() const { return path_; }
    const std::string& left() const { return left_; }
    const std::string& right() const { return right_; }

private:
    static std::string describe(const std::vector<std::string>& path,
                                const std::string& l, const std::string& r) {
        std::string p;
        for (const auto& s : path) {
            if (!p.empty()) p += ".";
            p += s;
        }
        return "cannot merge '" + l + "' with '" + r + "'" +
               (p.empty() ? std::string() : " at " + p);
    }

    std::vector<std::string> path_;
    std::string left_;
    std::string right_;
};

class NotBasic : public Error {
public:
    using Error::Error;
};

class NotCompatible : public Error {
public:
    using Error::Error;
};

class SynthesisFailure : public Error {
public:
    using Error::Error;
};

class ChoiceOwnership : public Error {
public:
    using Error::Error;
};

class NotSessionCompatible : public Error {
public:
    using Error::Error;
};

} // namespace mpst
