#pragma once

#include <ostream>
#include <string>
#include <string_view>

#include <json.hpp>

namespace modmix {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

/// Throws InvalidInput for anything but debug, info, warn, error, off.
LogLevel parse_log_level(std::string_view name);
void set_log_level(LogLevel level);
LogLevel log_level();

/// Redirects records (default std::cerr). Pass nullptr to restore.
void set_log_sink(std::ostream* sink);

/// Emits one JSON object per line: {"level": ..., "event": ..., <fields>}.
/// Thread-safe.
void log_event(LogLevel level, std::string_view event, const nlohmann::json& fields = nlohmann::json::object());

}  // namespace modmix
