#pragma once

#include <stdexcept>
#include <string>

namespace specavg
{

// Bad argument values (nonpositive scale, alpha out of range, unknown kind...).
class argument_error : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// An input violates a documented precondition (non-probability measure,
// atomic nu where continuity is required, non-symmetric matrix...).
class precondition_error : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

// The requested transform does not exist for this measure.
class unsupported_transform : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

// Iteration cap hit or tolerance not met. Carries the achieved error
// estimate when one is available (negative otherwise).
class numerical_error : public std::runtime_error
{
public:
    explicit numerical_error(const std::string& what, double achieved = -1.0)
        : std::runtime_error(what), achieved_(achieved)
    {
    }

    double achieved_error() const noexcept { return achieved_; }

private:
    double achieved_;
};

// Not enough scales above the resolution floor to estimate anything.
class insufficient_resolution : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace specavg
