#pragma once

#include <stdexcept>
#include <string>

namespace surveyml {

// Bad configuration: unresolvable codebook entries, invalid parameters,
// malformed config files. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or degenerate data: empty cohorts, single-class labels, columns with
// too few observed values. CLI exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace surveyml
