#pragma once

#include <string_view>

namespace sgf::log {

enum class Level { kQuiet, kWarn, kInfo };

void set_level(Level level);
Level level();

/// Thread-safe line output to stderr.
void warn(std::string_view message);
void info(std::string_view message);

}  // namespace sgf::log
