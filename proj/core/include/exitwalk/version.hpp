#pragma once

namespace exitwalk {
inline constexpr const char* kVersion = "0.1.0";
}
