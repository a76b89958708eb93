#pragma once

#include <stdexcept>
#include <string>

namespace mlo {

/// Invalid configuration or violated precondition on an input parameter.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// No valid placement exists for the requested geometry.
class GeometryError : public std::runtime_error {
public:
    explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside the mathematical domain of a formula (e.g. log of 0).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Caller broke a protocol between calls (e.g. update for an action never selected).
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

class EmptyInput : public std::invalid_argument {
public:
    explicit EmptyInput(const std::string& what) : std::invalid_argument(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mlo
