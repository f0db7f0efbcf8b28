#pragma once

#include <cstdio>
#include <string>

namespace flowforge {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

// Diagnostics go to stderr only; stdout is reserved for machine-parseable JSON.
namespace log_detail {
LogLevel& threshold();
}

void set_log_level(LogLevel level);
bool set_log_level(const std::string& name);

template <typename... Args>
void log_at(LogLevel level, const char* tag, const char* fmt, Args... args) {
    if (level < log_detail::threshold()) {
        return;
    }
    std::fprintf(stderr, "[%s] ", tag);
    std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
}

#define FF_LOG_DEBUG(...) ::flowforge::log_at(::flowforge::LogLevel::debug, "debug", __VA_ARGS__)
#define FF_LOG_INFO(...) ::flowforge::log_at(::flowforge::LogLevel::info, "info", __VA_ARGS__)
#define FF_LOG_WARN(...) ::flowforge::log_at(::flowforge::LogLevel::warn, "warn", __VA_ARGS__)
#define FF_LOG_ERROR(...) ::flowforge::log_at(::flowforge::LogLevel::error, "error", __VA_ARGS__)

}  // namespace flowforge
