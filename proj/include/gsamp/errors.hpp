#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace gsamp {

/// Input violated a documented precondition (bad dimensions, out-of-range
/// parameter, malformed structure).
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numerical routine failed: non-convergence, non-finite intermediate, etc.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Configuration file or schema problem. Maps to CLI exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// File system / parsing problem on data files. Maps to CLI exit code 1.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Emit a warning through the process-wide sink (default: stderr).
void log_warning(const std::string& msg);

/// Replace the warning sink; pass nullptr to restore the stderr default.
/// Used by tests to capture warnings.
void set_warning_sink(std::function<void(const std::string&)> sink);

} // namespace gsamp
