#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>

namespace criss {

// Base of every error this library throws.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad inputs, bad config, contract violations. CLI maps these to exit 2.
class validation_error : public error {
public:
    using error::error;
};

// Malformed file contents (bad magic, truncation, schema violations).
// A flavor of validation: CLI maps these to exit 2 as well.
class format_error : public validation_error {
public:
    using validation_error::validation_error;
};

// Filesystem-level failures (missing file, unwritable path). CLI exit 1.
class io_error : public error {
public:
    using error::error;
};

// External trainer misbehaved (nonzero exit, crashed). CLI exit 1.
class trainer_error : public error {
public:
    trainer_error(const std::string& msg, int exit_code)
        : error(msg), exit_code_(exit_code) {}
    int exit_code() const { return exit_code_; }

private:
    int exit_code_;
};

// External trainer exited 0 but violated the output protocol. CLI exit 1.
class protocol_error : public error {
public:
    using error::error;
};

// Non-fatal diagnostics (k clamped, shard count clamped, ...) go through a
// replaceable sink so tests can capture them. Default sink writes stderr.
using warn_sink_fn = std::function<void(const std::string&)>;

inline warn_sink_fn& warn_sink() {
    static warn_sink_fn sink = [](const std::string& msg) {
        std::cerr << "warning: " << msg << '\n';
    };
    return sink;
}

inline void warn(const std::string& msg) {
    if (warn_sink()) warn_sink()(msg);
}

}  // namespace criss
