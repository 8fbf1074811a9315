#pragma once

namespace vkns {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vkns
