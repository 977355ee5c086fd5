#pragma once

namespace timebin {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace timebin
