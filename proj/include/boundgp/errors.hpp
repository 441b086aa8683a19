#ifndef BOUNDGP_ERRORS_HPP
#define BOUNDGP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace boundgp {

/// Invalid caller input (bad dimensions, out-of-range parameters).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file; carries the byte offset where parsing stopped.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Factorization failure, non-convergence and similar numerical breakdowns.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace boundgp

#endif
