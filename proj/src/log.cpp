#include "bosd/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace bosd::logging {

namespace {

Level parse_level() {
  const char* env = std::getenv("BOSD_LOG");
  if (env == nullptr) return Level::kWarn;
  const std::string v(env);
  if (v == "debug") return Level::kDebug;
  if (v == "info") return Level::kInfo;
  if (v == "warn") return Level::kWarn;
  if (v == "error") return Level::kError;
  if (v == "off") return Level::kOff;
  return Level::kWarn;
}

const char* tag(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
    default: return "?";
  }
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Level threshold() {
  static const Level level = parse_level();
  return level;
}

void log(Level level, const std::string& message) {
  if (level < threshold()) return;
  std::lock_guard<std::mutex> lock(sink_mutex());
  std::cerr << "[bosd " << tag(level) << "] " << message << "\n";
}

}  // namespace bosd::logging
