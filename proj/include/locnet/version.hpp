#pragma once

namespace locnet {
inline constexpr const char* version = "0.1.0";
}
