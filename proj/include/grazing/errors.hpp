#pragma once

#include <stdexcept>
#include <string>

namespace grazing {

/// Argument outside the domain of a kernel or geometric map.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Quadrature failure, NaN velocity, or other loss of numerical meaning.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid run configuration. `field` names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace grazing
