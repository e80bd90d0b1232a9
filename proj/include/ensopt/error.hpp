#pragma once

#include <stdexcept>
#include <string>

namespace ensopt {

// Error taxonomy shared by the library and the CLI. The CLI maps each
// category to a process exit code: config=2, data=3, io=4.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad parameters, malformed manifests, impossible settings.
class config_error : public error {
public:
    using error::error;
};

// Inconsistent data: id mismatches, out-of-tolerance rows, model misalignment.
class data_error : public error {
public:
    using error::error;
};

// Filesystem problems: missing or unreadable files.
class io_error : public error {
public:
    using error::error;
};

} // namespace ensopt
