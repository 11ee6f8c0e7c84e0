#include "earlybird/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace earlybird::log {

namespace {
std::atomic<Level> g_level{Level::warn};
std::atomic<std::size_t> g_warnings{0};
std::mutex g_mutex;
}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void warn(std::string_view message) {
  ++g_warnings;
  if (g_level == Level::quiet) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "warning: " << message << '\n';
}

void info(std::string_view message) {
  if (g_level != Level::info) return;
  std::lock_guard lock(g_mutex);
  std::cerr << message << '\n';
}

std::size_t warning_count() { return g_warnings; }
void reset_warning_count() { g_warnings = 0; }

}  // namespace earlybird::log
