#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace constellation::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

void set_level(Level l);
Level level();
std::optional<Level> parse_level(std::string_view s);

void write(Level l, std::string_view component, const std::string& msg);

inline void debug(std::string_view c, const std::string& m) { write(Level::Debug, c, m); }
inline void info(std::string_view c, const std::string& m) { write(Level::Info, c, m); }
inline void warn(std::string_view c, const std::string& m) { write(Level::Warn, c, m); }
inline void error(std::string_view c, const std::string& m) { write(Level::Error, c, m); }

}  // namespace constellation::log
