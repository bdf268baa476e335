#include "sgf/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace sgf::log {

namespace {

std::atomic<Level> g_level{Level::kWarn};
std::mutex g_mutex;

void emit(const char* tag, std::string_view message) {
  const std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << tag << message << '\n';
}

}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void warn(std::string_view message) {
  if (g_level >= Level::kWarn) emit("warning: ", message);
}

void info(std::string_view message) {
  if (g_level >= Level::kInfo) emit("", message);
}

}  // namespace sgf::log
