// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#pragma once

#include <stdexcept>
#include <string>

namespace toposearch {

// Core code reports failures by exception; the C API translates each type
// into a status code (see toposearch.h).

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace toposearch
