#pragma once

namespace f1b {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace f1b
