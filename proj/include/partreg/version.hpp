#pragma once

namespace partreg {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kVersionString = "partreg 0.1.0";

}  // namespace partreg
