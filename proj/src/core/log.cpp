// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/core/log.hpp"

#include <atomic>

namespace dgkd::log {
namespace {
std::atomic<Level> g_threshold{Level::info};
}

Level threshold() { return g_threshold.load(std::memory_order_relaxed); }
void set_threshold(Level level) { g_threshold.store(level, std::memory_order_relaxed); }

void write(Level level, std::string_view message) {
  static constexpr const char* kTags[] = {"debug", "info", "warn", "error"};
  std::fprintf(stderr, "[%s] %.*s\n", kTags[static_cast<int>(level)], static_cast<int>(message.size()),
               message.data());
}

}  // namespace dgkd::log
