#pragma once

#include <string>

namespace asgm {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Current level, resolved once from the ASGM_LOG environment variable
/// (error | info | debug; default error).
LogLevel log_level();

void log_error(const std::string& message);
void log_info(const std::string& message);
void log_debug(const std::string& message);

}  // namespace asgm
