#include "modmix/logging.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

#include "modmix/error.hpp"

namespace modmix {

namespace {

std::atomic<LogLevel> g_level{LogLevel::Info};
std::mutex g_mutex;
std::ostream* g_sink = nullptr;

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warn: return "warn";
    case LogLevel::Error: return "error";
    case LogLevel::Off: return "off";
  }
  return "info";
}

}  // namespace

LogLevel parse_log_level(std::string_view name) {
  for (auto level : {LogLevel::Debug, LogLevel::Info, LogLevel::Warn, LogLevel::Error, LogLevel::Off}) {
    if (name == level_name(level)) return level;
  }
  throw InvalidInput("unknown log level '" + std::string(name) + "'");
}

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void set_log_sink(std::ostream* sink) {
  std::lock_guard lock(g_mutex);
  g_sink = sink;
}

void log_event(LogLevel level, std::string_view event, const nlohmann::json& fields) {
  if (level < g_level.load() || level == LogLevel::Off) return;
  nlohmann::json record = {{"level", level_name(level)}, {"event", std::string(event)}};
  if (fields.is_object()) {
    for (const auto& [key, value] : fields.items()) record[key] = value;
  }
  const std::string line = record.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  std::lock_guard lock(g_mutex);
  std::ostream& out = g_sink ? *g_sink : std::cerr;
  out << line << '\n';
  out.flush();
}

}  // namespace modmix
