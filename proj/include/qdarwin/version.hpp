#pragma once

namespace qdarwin {
inline constexpr const char* kVersion = "0.1.0";
}
