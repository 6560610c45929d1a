#include "hdrtv/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace hdrtv {

namespace {
std::atomic<LogLevel> g_level{LogLevel::info};
std::mutex g_mutex;

const char* tag(LogLevel l) {
  switch (l) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warn: return "warn";
    case LogLevel::error: return "error";
    case LogLevel::off: break;
  }
  return "";
}
}  // namespace

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void log(LogLevel level, std::string_view message) {
  if (level < g_level.load() || level == LogLevel::off) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "[hdrtv " << tag(level) << "] " << message << '\n';
}

}  // namespace hdrtv
