#pragma once

namespace tailatlas {

inline constexpr const char* kToolName = "tailatlas";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace tailatlas
