#pragma once

#include <cstddef>
#include <string_view>

namespace earlybird::log {

enum class Level { quiet, warn, info };

void set_level(Level level);
Level level();

void warn(std::string_view message);
void info(std::string_view message);

/// Total warnings emitted since start (or the last reset), for tests.
std::size_t warning_count();
void reset_warning_count();

}  // namespace earlybird::log
