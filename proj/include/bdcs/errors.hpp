#pragma once

#include <stdexcept>
#include <string>

namespace bdcs {

/// Invalid scalar parameter (even BEM order, K > L, infeasible packing, ...).
class ParameterError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Shapes of the inputs do not agree.
class DimensionError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Input is well-shaped but numerically degenerate (zero column, zero truth).
class DegenerateInputError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/// Configuration text could not be parsed; carries the 1-based line number
/// (0 when the problem is not tied to a line, e.g. a missing file).
class ConfigError : public std::runtime_error
{
public:
    ConfigError(int line, const std::string& what)
        : std::runtime_error(what), line_(line)
    {
    }
    int line() const { return line_; }

private:
    int line_;
};

} // namespace bdcs
