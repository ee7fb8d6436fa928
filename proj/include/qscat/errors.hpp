#ifndef QSCAT_ERRORS_HPP
#define QSCAT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qscat {

// Physics preconditions (negative energy, forbidden region, ...).
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken run-time numerics (norm drift, wrap-around, coarse phase grid, ...).
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration files or parameter blocks.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace qscat

#endif
