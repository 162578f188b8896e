#pragma once

namespace resil {

inline constexpr const char* kToolName = "resil-fuse";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace resil
