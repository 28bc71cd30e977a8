#include "vslda/common.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace vslda::log {

namespace {

std::atomic<Level> g_level{Level::kWarning};
std::mutex g_mutex;

void emit(Level lvl, const char* tag, std::string_view msg) {
  if (lvl < g_level.load()) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[vslda " << tag << "] " << msg << '\n';
}

}  // namespace

void set_level(Level lvl) { g_level.store(lvl); }
Level level() { return g_level.load(); }
void debug(std::string_view msg) { emit(Level::kDebug, "debug", msg); }
void info(std::string_view msg) { emit(Level::kInfo, "info", msg); }
void warning(std::string_view msg) { emit(Level::kWarning, "warning", msg); }

}  // namespace vslda::log
