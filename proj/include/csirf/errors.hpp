#pragma once

#include <stdexcept>
#include <string>

namespace csirf {

/// Invalid configuration: bad parameter values, inconsistent presets,
/// unusable command-line arguments. CLI exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Data problems: malformed files, grid mismatches, missing records,
/// label sets that do not line up. CLI exit code 3.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numeric failures: non-finite values, divergence, undefined ratios.
/// CLI exit code 4.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace csirf
