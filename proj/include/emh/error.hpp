#pragma once

#include <stdexcept>
#include <string>

namespace emh {

enum class ErrorKind {
    syntax,
    unknown_variable,
    domain,
    immersion,
    degenerate_metric,
    transversality,
    singular_basis,
    not_tangent,
    point_at_infinity,
    null_space,
    not_converged,
    config,
    io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Parse failure; position is a 0-based character offset into the formula.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t position)
        : Error(ErrorKind::syntax, what + " at position " + std::to_string(position)),
          position_(position)
    {
    }

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

} // namespace emh
