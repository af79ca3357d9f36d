#pragma once

#include <stdexcept>
#include <string>

namespace fsolink {

// Raised for malformed configuration input (files, tables, option sets).
// CLI maps this to exit code 2; domain violations use std::domain_error /
// std::out_of_range and map to exit code 3.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace fsolink
