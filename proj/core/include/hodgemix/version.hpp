#pragma once

namespace hodgemix {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hodgemix
