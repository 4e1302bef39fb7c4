#include "asgm/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace asgm {

namespace {

LogLevel resolve_level() {
    const char* env = std::getenv("ASGM_LOG");
    if (env == nullptr) return LogLevel::Error;
    std::string v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    return LogLevel::Error;
}

std::mutex g_mutex;

void emit(const char* tag, const std::string& message) {
    std::lock_guard<std::mutex> lock(g_mutex);
    std::cerr << "[asgm " << tag << "] " << message << "\n";
}

}  // namespace

LogLevel log_level() {
    static LogLevel level = resolve_level();
    return level;
}

void log_error(const std::string& message) { emit("error", message); }

void log_info(const std::string& message) {
    if (log_level() >= LogLevel::Info) emit("info", message);
}

void log_debug(const std::string& message) {
    if (log_level() >= LogLevel::Debug) emit("debug", message);
}

}  // namespace asgm
