#pragma once

namespace vaeq {
inline constexpr const char* kVersion = "0.1.0";
}
