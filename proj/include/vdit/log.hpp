// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

// Minimal leveled logging to stderr.

#pragma once

#include <iostream>
#include <sstream>
#include <string_view>

namespace vdit::log {

enum class Level { Debug, Info, Warn, Error };

inline Level& threshold() {
  static Level level = Level::Info;
  return level;
}

template <typename... Args>
void write(Level level, std::string_view tag, const Args&... args) {
  if (level < threshold()) return;
  std::ostringstream os;
  os << "[" << tag << "] ";
  (os << ... << args);
  os << '\n';
  std::cerr << os.str();
}

template <typename... Args>
void info(const Args&... args) { write(Level::Info, "info", args...); }
template <typename... Args>
void warn(const Args&... args) { write(Level::Warn, "warn", args...); }

}  // namespace vdit::log
