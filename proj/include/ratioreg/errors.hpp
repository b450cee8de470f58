#pragma once

#include <stdexcept>
#include <string>

namespace ratioreg {

class InputError : public std::invalid_argument {
  public:
    explicit InputError(const std::string& msg) : std::invalid_argument(msg) {}
};

class DegenerateDenominatorError : public std::runtime_error {
  public:
    explicit DegenerateDenominatorError(const std::string& msg)
        : std::runtime_error(msg) {}
};

class AlignmentError : public std::runtime_error {
  public:
    AlignmentError(const std::string& msg, std::ptrdiff_t worst_index)
        : std::runtime_error(msg), worst_index(worst_index) {}
    std::ptrdiff_t worst_index;
};

class CapacityError : public std::runtime_error {
  public:
    explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

class ExtrapolationError : public std::runtime_error {
  public:
    explicit ExtrapolationError(const std::string& msg)
        : std::runtime_error(msg) {}
};

class PremiseViolationError : public std::runtime_error {
  public:
    PremiseViolationError(const std::string& msg, double computed_value)
        : std::runtime_error(msg), computed_value(computed_value) {}
    double computed_value;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
          line(line) {}
    std::size_t line;
};

}  // namespace ratioreg
