#pragma once

#include <stdexcept>
#include <string>

namespace qrc {

/// Argument or configuration that violates a documented precondition.
class InvalidArgument : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// Array shapes that do not agree with each other.
class DimensionMismatch : public InvalidArgument
{
  public:
    using InvalidArgument::InvalidArgument;
};

/// Linear system that cannot be solved to working precision.
class IllConditioned : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Adaptive integration gave up; carries the last accepted time.
class IntegrationError : public std::runtime_error
{
  public:
    IntegrationError(const std::string& what, double last_time)
        : std::runtime_error(what + " (last accepted t = " + std::to_string(last_time) + ")"),
          last_time_(last_time)
    {
    }

    [[nodiscard]] double last_time() const noexcept { return last_time_; }

  private:
    double last_time_;
};

/// Closed-loop forecast produced a non-finite value.
class ForecastDiverged : public std::runtime_error
{
  public:
    ForecastDiverged(const std::string& what, long step)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_(step)
    {
    }

    [[nodiscard]] long step() const noexcept { return step_; }

  private:
    long step_;
};

} // namespace qrc
