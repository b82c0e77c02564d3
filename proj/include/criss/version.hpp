#pragma once

namespace criss {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace criss
