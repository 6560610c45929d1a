#pragma once

#include <string_view>

namespace hdrtv {

enum class LogLevel { debug, info, warn, error, off };

// Process-wide stderr logger; safe to call from worker threads.
void set_log_level(LogLevel level);
LogLevel log_level();
void log(LogLevel level, std::string_view message);

inline void log_info(std::string_view m) { log(LogLevel::info, m); }
inline void log_warn(std::string_view m) { log(LogLevel::warn, m); }
inline void log_error(std::string_view m) { log(LogLevel::error, m); }

}  // namespace hdrtv
