#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace mfdrift {

/// Base of every error raised by the library.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or input data. The CLI maps this to exit code 1.
class ConfigError : public Error
{
  public:
    ConfigError(std::string field_path, const std::string& message)
        : Error(field_path.empty() ? message : field_path + ": " + message)
        , field_path_(std::move(field_path))
    {}
    explicit ConfigError(const std::string& message) : ConfigError({}, message) {}

    const std::string& field_path() const noexcept { return field_path_; }

  private:
    std::string field_path_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error
{
  public:
    using Error::Error;
};

/// Numerical failure: blow-up, CFL violation, solver non-convergence.
class NumericalError : public Error
{
  public:
    explicit NumericalError(const std::string& message,
                            std::optional<std::size_t> step = std::nullopt)
        : Error(step ? message + " (step " + std::to_string(*step) + ")" : message)
        , step_(step)
    {}

    std::optional<std::size_t> step() const noexcept { return step_; }

  private:
    std::optional<std::size_t> step_;
};

}  // namespace mfdrift
