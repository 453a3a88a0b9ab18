#pragma once

#include <stdexcept>
#include <string>

namespace coreshape {

// Malformed external input (bad .npy header, bad instance JSON, ...).
class format_error : public std::runtime_error {
public:
    explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

// A packing budget too small to admit any core shape.
class infeasible_error : public std::runtime_error {
public:
    explicit infeasible_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace coreshape
