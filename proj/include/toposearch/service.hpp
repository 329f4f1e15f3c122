// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#pragma once

#include "toposearch/engine.hpp"

#include <memory>
#include <string>

namespace toposearch {

/// HTTP front end over one Engine. Endpoints:
///   GET  /api/health
///   GET  /api/search?q=&lat=&lon=&radius_m=&alpha=&k=&method=
///   POST /api/ask        {question, lat?, lon?, radius_m?, alpha?}
///   GET  /api/doc/{id}
/// Errors are JSON: {"error": {"status", "code", "message", "field"?}}.
class Service {
public:
    /// Binds immediately; port 0 picks a free port. Throws IoError when the
    /// port cannot be bound. The engine must outlive the service.
    Service(const Engine& engine, const std::string& host, int port);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    int port() const noexcept;
    /// Serves on a background thread.
    void start();
    /// Blocks until stop() is called from another thread.
    void wait();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace toposearch
