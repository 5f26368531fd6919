#pragma once

namespace mmflow {

inline constexpr const char* kToolName = "mmflow";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace mmflow
