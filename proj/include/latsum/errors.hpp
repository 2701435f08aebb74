#pragma once

#include <stdexcept>
#include <string>

namespace latsum {

// Bad user input or malformed data: the caller asked for something invalid.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// A configured resource guard tripped (grid size, rank budget, node cap,
// bench timeout). Separate from validation_error so callers can map it to a
// distinct exit status.
class resource_guard_error : public std::runtime_error {
public:
    explicit resource_guard_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace latsum
