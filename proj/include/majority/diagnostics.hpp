#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <utility>

namespace majority {

using WarningHandler = std::function<void(const std::string&)>;

namespace detail {
struct WarningSink {
  std::mutex mu;
  WarningHandler handler = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
};
inline WarningSink& warning_sink() {
  static WarningSink sink;
  return sink;
}
}  // namespace detail

/// Replaces the process-wide warning handler and returns the previous one.
inline WarningHandler set_warning_handler(WarningHandler handler) {
  auto& sink = detail::warning_sink();
  std::lock_guard lock(sink.mu);
  return std::exchange(sink.handler, std::move(handler));
}

inline void warn(const std::string& message) {
  auto& sink = detail::warning_sink();
  std::lock_guard lock(sink.mu);
  if (sink.handler) sink.handler(message);
}

}  // namespace majority
