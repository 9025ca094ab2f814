#pragma once

#include <stdexcept>
#include <string>

namespace metlearn {

/// Malformed or inconsistent external input (files, configs, shapes).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: divergent optimization, non-finite values.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace metlearn
