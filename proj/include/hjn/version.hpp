#pragma once

namespace hjn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hjn
