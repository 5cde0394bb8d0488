#pragma once

namespace bas {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bas
