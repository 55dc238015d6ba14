#pragma once

namespace qmfg {
inline constexpr const char* kVersion = "0.1.0";
}
