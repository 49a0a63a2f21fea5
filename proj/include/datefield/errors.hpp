#pragma once

#include <stdexcept>
#include <string>

namespace datefield {

// Thrown when a file cannot be opened, read or written.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when file contents are not in a supported format.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an argument or configuration violates a documented precondition.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace datefield
