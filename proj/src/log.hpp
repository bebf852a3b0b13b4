#pragma once

#include <fmt/core.h>

#include <atomic>
#include <cstdio>
#include <utility>

namespace innie::log {

enum class Level { quiet = 0, warn = 1, info = 2, debug = 3 };

inline std::atomic<int>& threshold() {
    static std::atomic<int> level{static_cast<int>(Level::info)};
    return level;
}

inline void set_level(Level level) { threshold().store(static_cast<int>(level)); }

template <class... Args>
void emit(Level level, const char* tag, fmt::format_string<Args...> format, Args&&... args) {
    if (static_cast<int>(level) > threshold().load()) return;
    fmt::print(stderr, "[{}] {}\n", tag, fmt::format(format, std::forward<Args>(args)...));
}

template <class... Args>
void warn(fmt::format_string<Args...> format, Args&&... args) {
    emit(Level::warn, "warn", format, std::forward<Args>(args)...);
}
template <class... Args>
void info(fmt::format_string<Args...> format, Args&&... args) {
    emit(Level::info, "info", format, std::forward<Args>(args)...);
}
template <class... Args>
void debug(fmt::format_string<Args...> format, Args&&... args) {
    emit(Level::debug, "debug", format, std::forward<Args>(args)...);
}

}  // namespace innie::log
