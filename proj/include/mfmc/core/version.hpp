#pragma once

namespace mfmc {
inline constexpr const char* version = "0.1.0";
}
