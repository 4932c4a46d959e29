#pragma once

#include <string>

namespace bosd::logging {

enum class Level { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3, kOff = 4 };

/// Threshold parsed once from the BOSD_LOG environment variable
/// ("debug", "info", "warn", "error", "off"); defaults to warn.
Level threshold();

void log(Level level, const std::string& message);

inline void debug(const std::string& m) { log(Level::kDebug, m); }
inline void info(const std::string& m) { log(Level::kInfo, m); }
inline void warn(const std::string& m) { log(Level::kWarn, m); }
inline void error(const std::string& m) { log(Level::kError, m); }

}  // namespace bosd::logging
