#include "constellation/util/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace constellation::log {

namespace {

spdlog::logger& sink() {
    static auto lg = [] {
        auto l = spdlog::stderr_logger_mt("constellation");
        l->set_pattern("[%l] %v");
        l->set_level(spdlog::level::warn);
        return l;
    }();
    return *lg;
}

spdlog::level::level_enum to_spd(Level l) {
    switch (l) {
        case Level::Debug: return spdlog::level::debug;
        case Level::Info:  return spdlog::level::info;
        case Level::Warn:  return spdlog::level::warn;
        case Level::Error: return spdlog::level::err;
        case Level::Off:   break;
    }
    return spdlog::level::off;
}

}  // namespace

void set_level(Level l) {
    sink().set_level(to_spd(l));
}

Level level() {
    switch (sink().level()) {
        case spdlog::level::trace:
        case spdlog::level::debug: return Level::Debug;
        case spdlog::level::info:  return Level::Info;
        case spdlog::level::warn:  return Level::Warn;
        case spdlog::level::err:
        case spdlog::level::critical: return Level::Error;
        default: return Level::Off;
    }
}

std::optional<Level> parse_level(std::string_view s) {
    if (s == "debug") return Level::Debug;
    if (s == "info") return Level::Info;
    if (s == "warn") return Level::Warn;
    if (s == "error") return Level::Error;
    if (s == "off") return Level::Off;
    return std::nullopt;
}

void write(Level l, std::string_view component, const std::string& msg) {
    sink().log(to_spd(l), "{}: {}", component, msg);
}

}  // namespace constellation::log
