#pragma once

namespace hcim {
inline constexpr const char* kVersion = "0.1.0";
}
