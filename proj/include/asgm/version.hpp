#pragma once

namespace asgm {

inline constexpr const char* kVersion = "asgm 0.1.0";

}  // namespace asgm
