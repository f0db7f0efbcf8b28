#include "flowforge/log.hpp"

namespace flowforge {

namespace log_detail {
LogLevel& threshold() {
    static LogLevel level = LogLevel::info;
    return level;
}
}  // namespace log_detail

void set_log_level(LogLevel level) {
    log_detail::threshold() = level;
}

bool set_log_level(const std::string& name) {
    if (name == "debug") {
        set_log_level(LogLevel::debug);
    } else if (name == "info") {
        set_log_level(LogLevel::info);
    } else if (name == "warn") {
        set_log_level(LogLevel::warn);
    } else if (name == "error") {
        set_log_level(LogLevel::error);
    } else if (name == "off") {
        set_log_level(LogLevel::off);
    } else {
        return false;
    }
    return true;
}

}  // namespace flowforge
