#pragma once

namespace crbeam {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kVersionString = "crbeam 0.1.0";

}  // namespace crbeam
