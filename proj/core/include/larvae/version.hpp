#pragma once

namespace larvae {

inline constexpr const char* kToolName = "larvactl";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace larvae
