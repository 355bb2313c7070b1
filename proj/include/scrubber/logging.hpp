#ifndef SCRUBBER_LOGGING_HPP
#define SCRUBBER_LOGGING_HPP

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace scrubber {

enum class LogLevel : int { error = 0, warn = 1, info = 2, debug = 3 };

/// Level comes from the SCRUBBER_LOG env var (error|warn|info|debug),
/// default warn. Output goes to stderr.
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("SCRUBBER_LOG");
    if (!env) return LogLevel::warn;
    if (std::strcmp(env, "error") == 0) return LogLevel::error;
    if (std::strcmp(env, "info") == 0) return LogLevel::info;
    if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
    return LogLevel::warn;
  }();
  return level;
}

inline void log_at(LogLevel level, const char* tag, const char* fmt, va_list args) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::fprintf(stderr, "[%s] ", tag);
  std::vfprintf(stderr, fmt, args);
  std::fputc('\n', stderr);
}

#define SCRUBBER_DEFINE_LOG(name, level, tag)              \
  inline void name(const char* fmt, ...) {                 \
    va_list args;                                          \
    va_start(args, fmt);                                   \
    log_at(level, tag, fmt, args);                         \
    va_end(args);                                          \
  }

SCRUBBER_DEFINE_LOG(log_error, LogLevel::error, "error")
SCRUBBER_DEFINE_LOG(log_warn, LogLevel::warn, "warn")
SCRUBBER_DEFINE_LOG(log_info, LogLevel::info, "info")
SCRUBBER_DEFINE_LOG(log_debug, LogLevel::debug, "debug")

#undef SCRUBBER_DEFINE_LOG

}  // namespace scrubber

#endif
